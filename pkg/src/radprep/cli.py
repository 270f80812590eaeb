"""Batch command-line front end.

Subcommands: enhance, baseline, mask, stability, eval, hist. Options come
from built-in defaults, overridden by a key=value config file, overridden
by flags. Exit codes: 0 success, 1 usage or schema error, 2 when one or
more inputs failed (details land in errors.json and processing continues).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from . import detect_eval
from .attention import AttentionProvider, FileProvider, SyntheticProvider
from .enhance import ClaheParams, clahe, enhance_pipeline, global_hist_equalize
from .errors import RadprepError, SchemaError
from .raster_io import compute_histogram, load_image, naive_8bit, write_histogram_csv, write_image
from .robustness import AugSpec, stability_report
from .roi_mask import MaskParams, extract_roi, write_mask

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARTIAL = 2


@dataclass(frozen=True)
class Config:
    percentile: float = 70.0
    morph_radius: int | None = None  # None = auto from image size
    attn_source: str = "file"  # file | synthetic
    attn_suffix: str = ".attn"
    synthetic_radius: int = 7
    clahe_tiles: tuple[int, int] = (8, 8)
    clahe_clip: float = 2.0
    target_fpr: float = 0.015
    out_dir: Path = Path(".")
    bit_depth: int | None = None  # None = container-implied

    def provider(self) -> AttentionProvider:
        if self.attn_source == "synthetic":
            return SyntheticProvider(radius=self.synthetic_radius)
        return FileProvider(suffix=self.attn_suffix)

    def mask_params(self) -> MaskParams:
        return MaskParams(percentile=self.percentile, morph_radius=self.morph_radius)

    def clahe_params(self) -> ClaheParams:
        return ClaheParams(tiles=self.clahe_tiles, clip_factor=self.clahe_clip)


def _parse_radius(text: str) -> int | None:
    return None if text == "auto" else int(text)


def _parse_tiles(text: str) -> tuple[int, int]:
    parts = text.lower().replace("x", ",").split(",")
    if len(parts) != 2:
        raise ValueError(f"expected ROWSxCOLS, got {text!r}")
    return int(parts[0]), int(parts[1])


def _parse_source(text: str) -> str:
    if text not in ("file", "synthetic"):
        raise ValueError(f"attn_source must be file|synthetic, got {text!r}")
    return text


def _parse_depth(text: str) -> int | None:
    return None if text in ("auto", "none") else int(text)


_CONVERTERS = {
    "percentile": float,
    "morph_radius": _parse_radius,
    "attn_source": _parse_source,
    "attn_suffix": str,
    "synthetic_radius": int,
    "clahe_tiles": _parse_tiles,
    "clahe_clip": float,
    "target_fpr": float,
    "out_dir": Path,
    "bit_depth": _parse_depth,
}


def load_config_file(path) -> dict:
    """Parse a key=value config file; '#' starts a comment line."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise SchemaError(f"{path}:{lineno}: expected key=value")
        key, _, raw = line.partition("=")
        key = key.strip()
        if key not in _CONVERTERS:
            raise SchemaError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _CONVERTERS[key](raw.strip())
        except ValueError as exc:
            raise SchemaError(f"{path}:{lineno}: {exc}") from exc
    return values


def build_config(args: argparse.Namespace) -> Config:
    config = Config()
    if args.config is not None:
        config = replace(config, **load_config_file(args.config))
    overrides = {
        key: getattr(args, key)
        for key in _CONVERTERS
        if getattr(args, key, None) is not None
    }
    return replace(config, **overrides)


class _Parser(argparse.ArgumentParser):
    # spec reserves exit code 2 for partial failures; usage errors exit 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_common_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", type=Path, help="key=value config file")
    parser.add_argument("--percentile", type=float)
    parser.add_argument("--morph-radius", dest="morph_radius", type=_parse_radius)
    parser.add_argument("--attn-source", dest="attn_source", type=_parse_source)
    parser.add_argument("--attn-suffix", dest="attn_suffix")
    parser.add_argument("--synthetic-radius", dest="synthetic_radius", type=int)
    parser.add_argument("--clahe-tiles", dest="clahe_tiles", type=_parse_tiles)
    parser.add_argument("--clahe-clip", dest="clahe_clip", type=float)
    parser.add_argument("--target-fpr", dest="target_fpr", type=float)
    parser.add_argument("--out-dir", dest="out_dir", type=Path)
    parser.add_argument("--bit-depth", dest="bit_depth", type=_parse_depth)


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="radprep", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enhance", help="masked histogram equalization per image")
    p.add_argument("inputs", nargs="+", type=Path)
    _add_common_flags(p)

    p = sub.add_parser("baseline", help="he / clahe / 8bit baseline preprocessing")
    p.add_argument("--method", required=True, choices=("he", "clahe", "8bit"))
    p.add_argument("inputs", nargs="+", type=Path)
    _add_common_flags(p)

    p = sub.add_parser("mask", help="write ROI masks only")
    p.add_argument("inputs", nargs="+", type=Path)
    _add_common_flags(p)

    p = sub.add_parser("stability", help="mask IoU under intensity augmentations")
    p.add_argument("input", type=Path)
    p.add_argument("--specs", required=True, type=Path, help="JSON list of augmentations")
    _add_common_flags(p)

    p = sub.add_parser("eval", help="detection/classification metrics from JSON files")
    p.add_argument("--gt", required=True, type=Path)
    p.add_argument("--pred", required=True, type=Path)
    _add_common_flags(p)

    p = sub.add_parser("hist", help="export intensity histograms as CSV")
    p.add_argument("inputs", nargs="+", type=Path)
    p.add_argument("--masked", action="store_true", help="count ROI pixels only")
    _add_common_flags(p)

    return parser


def _out_dir(config: Config) -> Path:
    config.out_dir.mkdir(parents=True, exist_ok=True)
    return config.out_dir


def _run_batch(inputs, config: Config, process) -> int:
    """Apply ``process`` per input, isolating failures into errors.json."""
    out_dir = _out_dir(config)
    errors = []
    for path in inputs:
        try:
            process(path, out_dir)
        except (RadprepError, ValueError, OSError) as exc:
            errors.append(
                {"input": str(path), "error": type(exc).__name__, "message": str(exc)}
            )
    if errors:
        (out_dir / "errors.json").write_text(json.dumps(errors, indent=2) + "\n")
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_enhance(args, config: Config) -> int:
    provider = config.provider()
    params = config.mask_params()

    def process(path, out_dir):
        image = load_image(path, bit_depth=config.bit_depth)
        enhance_pipeline(image, provider, params, out_dir=out_dir)

    return _run_batch(args.inputs, config, process)


def cmd_baseline(args, config: Config) -> int:
    def process(path, out_dir):
        image = load_image(path, bit_depth=config.bit_depth)
        if args.method == "he":
            write_image(global_hist_equalize(image), out_dir / f"{path.stem}.he.png")
        elif args.method == "clahe":
            result = clahe(naive_8bit(image), config.clahe_params())
            write_image(result, out_dir / f"{path.stem}.clahe.png")
        else:
            write_image(naive_8bit(image), out_dir / f"{path.stem}.8bit.png")

    return _run_batch(args.inputs, config, process)


def cmd_mask(args, config: Config) -> int:
    provider = config.provider()
    params = config.mask_params()

    def process(path, out_dir):
        image = load_image(path, bit_depth=config.bit_depth)
        write_mask(extract_roi(image, provider, params), out_dir / f"{path.stem}.mask.png")

    return _run_batch(args.inputs, config, process)


def _load_specs(path) -> list[AugSpec]:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"{path}: {exc}") from exc
    if not isinstance(data, list):
        raise SchemaError(f"{path}: expected a JSON list of augmentations")
    try:
        return [AugSpec.from_dict(entry) for entry in data]
    except (TypeError, KeyError, ValueError) as exc:
        raise SchemaError(f"{path}: {exc}") from exc


def cmd_stability(args, config: Config) -> int:
    specs = _load_specs(args.specs)
    out_dir = _out_dir(config)
    provider = config.provider()
    stem = args.input.stem
    mask_path = out_dir / f"{stem}.mask.png"

    def process(path, out_dir):
        image = load_image(path, bit_depth=config.bit_depth)
        report = stability_report(
            image, provider, config.mask_params(), specs, baseline_mask_path=mask_path
        )
        write_mask(extract_roi(image, provider, config.mask_params()), mask_path)
        (out_dir / f"{stem}.stability.json").write_text(
            json.dumps(report.to_dict(), indent=2) + "\n"
        )

    return _run_batch([args.input], config, process)


def cmd_eval(args, config: Config) -> int:
    out_dir = _out_dir(config)
    report = detect_eval.evaluate(args.gt, args.pred, target_fpr=config.target_fpr)
    detect_eval.write_report_json(report, out_dir / "report.json")
    detect_eval.write_roc_csv(report.roc_points, out_dir / "roc.csv")
    return EXIT_OK


def cmd_hist(args, config: Config) -> int:
    provider = config.provider()
    params = config.mask_params()

    def process(path, out_dir):
        image = load_image(path, bit_depth=config.bit_depth)
        mask = extract_roi(image, provider, params) if args.masked else None
        write_histogram_csv(compute_histogram(image, mask), out_dir / f"{path.stem}.hist.csv")

    return _run_batch(args.inputs, config, process)


_COMMANDS = {
    "enhance": cmd_enhance,
    "baseline": cmd_baseline,
    "mask": cmd_mask,
    "stability": cmd_stability,
    "eval": cmd_eval,
    "hist": cmd_hist,
}


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = build_config(args)
    except (SchemaError, OSError) as exc:
        print(f"radprep: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args, config)
    except (SchemaError,) as exc:
        print(f"radprep: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RadprepError as exc:
        print(f"radprep: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
