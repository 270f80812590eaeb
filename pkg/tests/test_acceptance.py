"""Acceptance suite: one test per release criterion, at pinned tolerances.

Each test prints a single ``[PASS]``/``[FAIL]`` line (visible with
``pytest -s`` or in failure output); the test name states the criterion.
Run with ``pytest tests/test_acceptance.py -v``.
"""

import functools
import json
from pathlib import Path

import numpy as np

from radprep.attention import SyntheticProvider
from radprep.cli import main
from radprep.detect_eval import auc, evaluate, roc_curve, wald_ci
from radprep.enhance import ClaheParams, clahe, masked_hist_equalize
from radprep.raster_io import AttentionMap, ForegroundMask, Radiograph, write_attn, write_image
from radprep.roi_mask import (
    MaskParams,
    extract_roi,
    morph_close,
    morph_open,
    percentile_threshold,
)

from conftest import components_oracle, mann_whitney_oracle

DATA = Path(__file__).parent / "data"


def criterion(label):
    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"[FAIL] {label}")
                raise
            print(f"[PASS] {label}")

        return wrapper

    return decorate


@criterion("Wald CI reproduces the published 95% brackets to within 0.1 pp")
def test_c01_wald_ci_reproduces_published_brackets():
    cases = [
        ((0.825, 80), (0.741, 0.908)),
        ((0.775, 80), (0.683, 0.866)),
        ((0.8243, 273), (0.779, 0.869)),
        ((0.6891, 273), (0.634, 0.744)),
    ]
    for (p_hat, n), (lo_expected, hi_expected) in cases:
        lo, hi = wald_ci(p_hat, n)
        assert abs(lo - lo_expected) <= 1e-3, (p_hat, n, lo)
        assert abs(hi - hi_expected) <= 1e-3, (p_hat, n, hi)


@criterion("AUC equals Mann-Whitney pair counting on 1000 fixtures, |d| <= 1e-12")
def test_c02_auc_equals_mann_whitney():
    rng = np.random.default_rng(7001)
    checked = 0
    while checked < 1000:
        n = int(rng.integers(2, 51))
        # coarse grid forces plenty of score ties
        scores = rng.integers(0, 8, n) / 7.0
        labels = rng.integers(0, 2, n).astype(bool)
        if labels.all() or not labels.any():
            continue
        samples = list(zip(scores.tolist(), labels.tolist()))
        delta = auc(roc_curve(samples)) - mann_whitney_oracle(samples)
        assert abs(delta) <= 1e-12
        checked += 1


def _random_masked_image(rng):
    depth = int(rng.integers(8, 13))
    shape = (int(rng.integers(4, 24)), int(rng.integers(4, 24)))
    pixels = rng.integers(0, 1 << depth, shape)
    bits = rng.random(shape) < 0.6
    bits[rng.integers(0, shape[0]), rng.integers(0, shape[1])] = True
    return Radiograph(pixels=pixels.astype(np.uint16), bit_depth=depth), ForegroundMask(bits=bits)


def _random_increasing_lut(rng, depth):
    # strictly increasing integer map into the 16-bit range
    steps = rng.integers(1, 9, size=1 << depth)
    return np.cumsum(steps) - steps[0]


@criterion("Masked HE is pixel-identical under strictly increasing transforms (200 trials)")
def test_c03_masked_he_rank_invariance():
    rng = np.random.default_rng(7002)
    for _ in range(200):
        image, mask = _random_masked_image(rng)
        base = masked_hist_equalize(image, mask)
        lut = _random_increasing_lut(rng, image.bit_depth)
        transformed = Radiograph(
            pixels=lut[image.pixels].astype(np.uint16), bit_depth=16
        )
        out = masked_hist_equalize(transformed, mask)
        assert np.array_equal(base.pixels, out.pixels)


@criterion("Masked HE never reacts to background pixel edits (100 trials)")
def test_c04_masked_he_background_independence():
    rng = np.random.default_rng(7003)
    trials = 0
    while trials < 100:
        image, mask = _random_masked_image(rng)
        background = np.argwhere(~mask.bits)
        if len(background) == 0:
            continue
        base = masked_hist_equalize(image, mask)
        y, x = background[rng.integers(0, len(background))]
        mutated = image.pixels.copy()
        mutated[y, x] = rng.integers(0, 1 << image.bit_depth)
        out = masked_hist_equalize(
            Radiograph(pixels=mutated, bit_depth=image.bit_depth), mask
        )
        assert np.array_equal(base.pixels, out.pixels)
        trials += 1


@criterion("Masked-HE output CDF is within max-bin-mass/N + 1/65535 of uniform")
def test_c05_flattening_bound():
    rng = np.random.default_rng(7004)
    for _ in range(10):
        pixels = rng.integers(0, 65536, (128, 128)).astype(np.uint16)
        bits = rng.random((128, 128)) < 0.6
        bits[0, 0] = True
        image = Radiograph(pixels=pixels, bit_depth=16)
        mask = ForegroundMask(bits=bits)
        fg_in = pixels[bits]
        assert len(np.unique(fg_in)) >= 1000  # fixture requirement
        out = masked_hist_equalize(image, mask)
        fg_out = out.pixels[bits]
        n = len(fg_out)
        cdf = np.cumsum(np.bincount(fg_out, minlength=65536)) / n
        grid = np.arange(65536) / 65535.0
        ks = np.abs(cdf - grid).max()
        bound = np.bincount(fg_in).max() / n + 1.0 / 65535.0
        assert ks <= bound, (ks, bound)


@criterion("Morphology laws hold exactly on 500 random masks")
def test_c06_morphology_laws():
    rng = np.random.default_rng(7005)
    for _ in range(500):
        shape = (int(rng.integers(1, 20)), int(rng.integers(1, 20)))
        mask = ForegroundMask(bits=rng.random(shape) < rng.uniform(0.2, 0.8))
        radius = int(rng.integers(1, 3))
        opened = morph_open(mask, radius)
        closed = morph_close(mask, radius)
        assert np.array_equal(morph_open(opened, radius).bits, opened.bits)
        assert np.array_equal(morph_close(closed, radius).bits, closed.bits)
        assert not (opened.bits & ~mask.bits).any()  # open(m) subset of m
        assert not (mask.bits & ~closed.bits).any()  # m subset of close(m)


@criterion("extract_roi yields one component on 100 fixtures; threshold is rank-exact")
def test_c07_extract_roi_postcondition_and_rank_invariance():
    rng = np.random.default_rng(7006)
    for _ in range(100):
        size = int(rng.integers(64, 128))
        bh, bw = int(rng.integers(16, size // 3)), int(rng.integers(16, size // 3))
        y = int(rng.integers(0, size - bh))
        x = int(rng.integers(0, size - bw))
        pixels = np.zeros((size, size), dtype=np.uint16)
        pixels[y : y + bh, x : x + bw] = 2000 + rng.integers(0, 2000, (bh, bw))
        image = Radiograph(pixels=pixels, bit_depth=12)
        mask = extract_roi(image, SyntheticProvider(), MaskParams())
        assert mask.bits.any()
        assert len(components_oracle(mask.bits)) == 1

    for _ in range(50):
        values = rng.integers(0, 1000, (int(rng.integers(2, 30)), int(rng.integers(2, 30))))
        amap = AttentionMap(values=values.astype(np.float32))
        try:
            base = percentile_threshold(amap, 70.0)
        except Exception:
            continue
        # integer-exact strictly increasing transforms in float32
        for transformed in (values * 13 + 7, values * values + values):
            out = percentile_threshold(
                AttentionMap(values=transformed.astype(np.float32)), 70.0
            )
            assert np.array_equal(base.bits, out.bits)


@criterion("CLAHE with one unclipped tile equals global 8-bit HE on 50 images")
def test_c08_clahe_degenerate_equivalence():
    rng = np.random.default_rng(7007)
    for _ in range(50):
        shape = (int(rng.integers(8, 40)), int(rng.integers(8, 40)))
        pixels = rng.integers(0, 256, shape).astype(np.uint16)
        image = Radiograph(pixels=pixels, bit_depth=8)
        out = clahe(image, ClaheParams(tiles=(1, 1), clip_factor=256.0))
        counts = np.bincount(pixels.ravel(), minlength=256)
        occupied = np.flatnonzero(counts)
        if len(occupied) < 2:
            expected = pixels  # degenerate: identity stretch at 8 bits
        else:
            cumulative = np.cumsum(counts)
            c_min = cumulative[occupied[0]]
            lut = np.floor(
                (cumulative - c_min) * 255.0 / (cumulative[-1] - c_min) + 0.5
            ).astype(np.uint16)
            expected = lut[pixels]
        assert np.array_equal(out.pixels, expected)


@criterion("cmd_enhance is bit-identical across runs on a 20-image corpus")
def test_c09_end_to_end_determinism(tmp_path):
    import time

    rng = np.random.default_rng(7008)
    inputs = []
    for i in range(20):
        size = 96
        pixels = np.zeros((size, size), dtype=np.uint16)
        bh, bw = int(rng.integers(20, 32)), int(rng.integers(20, 32))
        y, x = int(rng.integers(0, size - bh)), int(rng.integers(0, size - bw))
        pixels[y : y + bh, x : x + bw] = 2000 + rng.integers(0, 2000, (bh, bw))
        image = Radiograph(pixels=pixels, bit_depth=12)
        path = tmp_path / f"case{i:02d}.png"
        write_image(image, path)
        write_attn(SyntheticProvider().attention_for(image), tmp_path / f"case{i:02d}.attn")
        inputs.append(str(path))

    started = time.monotonic()
    out_a, out_b = tmp_path / "run_a", tmp_path / "run_b"
    assert main(["enhance", *inputs, "--out-dir", str(out_a)]) == 0
    assert main(["enhance", *inputs, "--out-dir", str(out_b)]) == 0
    elapsed = time.monotonic() - started
    names = sorted(p.name for p in out_a.iterdir())
    assert len(names) == 40  # enhanced + mask per image
    for name in names:
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()
    assert elapsed < 10.0, f"two runs took {elapsed:.1f}s"


@criterion("Committed 10-image fixture reproduces the committed report")
def test_c10_golden_evaluation_fixture():
    report = evaluate(DATA / "golden_gt.json", DATA / "golden_pred.json")
    expected = json.loads((DATA / "golden_report.json").read_text())
    got = report.to_dict()

    assert got["accuracy"]["matched"] == expected["accuracy"]["matched"]
    assert got["accuracy"]["total"] == expected["accuracy"]["total"]

    def close(a, b):
        assert a is not None and b is not None
        assert abs(a - b) <= 1e-12, (a, b)

    close(got["auc"], expected["auc"])
    close(got["accuracy"]["fraction"], expected["accuracy"]["fraction"])
    close(got["accuracy"]["ci"][0], expected["accuracy"]["ci"][0])
    close(got["accuracy"]["ci"][1], expected["accuracy"]["ci"][1])
    close(got["iou_mean"], expected["iou_mean"])
    close(got["iou_std"], expected["iou_std"])
    sens_got = got["sensitivity_at_fpr"]
    sens_expected = expected["sensitivity_at_fpr"]
    close(sens_got["target_fpr"], sens_expected["target_fpr"])
    close(sens_got["achieved_fpr"], sens_expected["achieved_fpr"])
    close(sens_got["tpr"], sens_expected["tpr"])
    assert len(got["roc_points"]) == len(expected["roc_points"])
    for gp, ep in zip(got["roc_points"], expected["roc_points"]):
        close(gp["fpr"], ep["fpr"])
        close(gp["tpr"], ep["tpr"])
        if ep["threshold"] is None:
            assert gp["threshold"] is None
        else:
            close(gp["threshold"], ep["threshold"])
