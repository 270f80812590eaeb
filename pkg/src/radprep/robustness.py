"""Intensity-domain perturbations and mask-stability reporting.

Real radiograph archives mix inverted, shifted, scaled, and requantized
exposures of the same anatomy. These augmentations let us measure how much
the extracted foreground mask moves when the histogram is perturbed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .attention import AttentionProvider
from .errors import DimensionMismatch, EmptyMask
from .raster_io import ForegroundMask, Radiograph, round_half_up
from .roi_mask import MaskParams, extract_roi


@dataclass(frozen=True)
class AugSpec:
    """One intensity perturbation: invert, affine(gain, bias), or requantize."""

    kind: str
    gain: float = 1.0
    bias: float = 0.0
    new_bit_depth: int | None = None

    _KINDS = ("invert", "affine", "requantize")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown augmentation kind {self.kind!r}")
        if self.kind == "affine" and self.gain <= 0:
            raise ValueError("affine gain must be positive")
        if self.kind == "requantize":
            if self.new_bit_depth is None or not 8 <= self.new_bit_depth <= 16:
                raise ValueError("requantize needs a target bit depth in [8, 16]")

    @classmethod
    def invert(cls) -> "AugSpec":
        return cls(kind="invert")

    @classmethod
    def affine(cls, gain: float, bias: float) -> "AugSpec":
        return cls(kind="affine", gain=gain, bias=bias)

    @classmethod
    def requantize(cls, new_bit_depth: int) -> "AugSpec":
        return cls(kind="requantize", new_bit_depth=new_bit_depth)

    def describe(self) -> str:
        if self.kind == "invert":
            return "invert"
        if self.kind == "affine":
            return f"affine(gain={self.gain:g}, bias={self.bias:g})"
        return f"requantize({self.new_bit_depth})"

    def to_dict(self) -> dict:
        if self.kind == "invert":
            return {"kind": "invert"}
        if self.kind == "affine":
            return {"kind": "affine", "gain": self.gain, "bias": self.bias}
        return {"kind": "requantize", "new_bit_depth": self.new_bit_depth}

    @classmethod
    def from_dict(cls, data: dict) -> "AugSpec":
        kind = data.get("kind")
        if kind == "invert":
            return cls.invert()
        if kind == "affine":
            return cls.affine(float(data["gain"]), float(data.get("bias", 0.0)))
        if kind == "requantize":
            return cls.requantize(int(data["new_bit_depth"]))
        raise ValueError(f"unknown augmentation kind {kind!r}")


def augment(image: Radiograph, spec: AugSpec) -> Radiograph:
    """Apply one perturbation; requantize is the only one changing bit depth."""
    if spec.kind == "invert":
        out = image.max_value - image.pixels
        return Radiograph(pixels=out, bit_depth=image.bit_depth, source=image.source)
    if spec.kind == "affine":
        mapped = spec.gain * image.pixels.astype(np.float64) + spec.bias
        out = np.clip(round_half_up(mapped), 0, image.max_value).astype(np.uint16)
        return Radiograph(pixels=out, bit_depth=image.bit_depth, source=image.source)
    if spec.new_bit_depth > image.bit_depth:
        raise ValueError("requantize cannot widen the bit depth")
    shift = image.bit_depth - spec.new_bit_depth
    out = image.pixels >> shift
    return Radiograph(pixels=out, bit_depth=spec.new_bit_depth, source=image.source)


def mask_iou(a: ForegroundMask, b: ForegroundMask) -> float:
    """Intersection over union of two masks; 1.0 when both are empty."""
    if a.bits.shape != b.bits.shape:
        raise DimensionMismatch(f"{a.bits.shape} vs {b.bits.shape}")
    union = int(np.logical_or(a.bits, b.bits).sum())
    if union == 0:
        return 1.0
    intersection = int(np.logical_and(a.bits, b.bits).sum())
    return intersection / union


@dataclass(frozen=True)
class StabilityEntry:
    aug: str
    iou: float
    empty: bool


@dataclass(frozen=True)
class StabilityReport:
    entries: tuple[StabilityEntry, ...]
    min_iou: float | None
    mean_iou: float | None
    baseline_mask_path: str | None = None

    def to_dict(self) -> dict:
        return {
            "baseline_mask_path": self.baseline_mask_path,
            "entries": [
                {"aug": e.aug, "iou": e.iou, "empty": e.empty} for e in self.entries
            ],
            "min_iou": self.min_iou,
            "mean_iou": self.mean_iou,
        }


def stability_report(
    image: Radiograph,
    provider: AttentionProvider,
    params: MaskParams = MaskParams(),
    specs: list[AugSpec] = (),
    baseline_mask_path=None,
) -> StabilityReport:
    """Mask IoU of each augmented variant against the unperturbed mask.

    A variant whose mask comes out empty is recorded with IoU 0 and the
    ``empty`` flag instead of aborting the report.
    """
    baseline = extract_roi(image, provider, params)
    entries = []
    for spec in specs:
        perturbed = augment(image, spec)
        try:
            mask = extract_roi(perturbed, provider, params)
        except EmptyMask:
            entries.append(StabilityEntry(aug=spec.describe(), iou=0.0, empty=True))
            continue
        entries.append(
            StabilityEntry(aug=spec.describe(), iou=mask_iou(baseline, mask), empty=False)
        )
    ious = [e.iou for e in entries]
    return StabilityReport(
        entries=tuple(entries),
        min_iou=min(ious) if ious else None,
        mean_iou=sum(ious) / len(ious) if ious else None,
        baseline_mask_path=str(baseline_mask_path) if baseline_mask_path else None,
    )
