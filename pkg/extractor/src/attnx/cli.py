"""attnx command line: batch attention extraction to ATTN files."""

from __future__ import annotations

import argparse
import glob
import sys
from pathlib import Path

from .errors import ExtractorError
from .extract import ExtractorConfig, build_model, extract, extract_heads


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="attnx", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("extract", help="write class-token attention maps")
    p.add_argument("--input", required=True, nargs="+",
                   help="image paths or glob patterns")
    p.add_argument("--out-dir", required=True, type=Path)
    p.add_argument("--per-head", action="store_true",
                   help="also write one map per attention head")
    p.add_argument("--resize", type=int, default=518,
                   help="longest side after resize; 0 keeps original size")
    p.add_argument("--weights", type=Path, help="pretrained backbone checkpoint")
    p.add_argument("--allow-random-weights", action="store_true",
                   help="seeded random init instead of a checkpoint (testing only)")
    p.add_argument("--seed", type=int, default=0)
    return parser


def expand_inputs(patterns) -> list[Path]:
    paths = []
    for pattern in patterns:
        hits = sorted(glob.glob(pattern))
        paths.extend(Path(h) for h in hits) if hits else paths.append(Path(pattern))
    return paths


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    config = ExtractorConfig(
        resize_target=args.resize,
        weights=args.weights,
        allow_random=args.allow_random_weights,
        seed=args.seed,
    )
    try:
        model = build_model(config)
    except ExtractorError as exc:
        print(f"attnx: {exc}", file=sys.stderr)
        return 1
    args.out_dir.mkdir(parents=True, exist_ok=True)
    failures = 0
    for path in expand_inputs(args.input):
        try:
            extract(path, args.out_dir / f"{path.stem}.attn", config, model=model)
            if args.per_head:
                extract_heads(path, args.out_dir, config, model=model)
        except ExtractorError as exc:
            failures += 1
            print(f"attnx: {path}: {exc}", file=sys.stderr)
    return 2 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
