"""Attention-map providers.

The mask pipeline only needs *some* per-image saliency map. In production
that map comes from a ViT feature extractor and is read from a sidecar
file; for tests and demos a local-contrast surrogate is computed directly
from the image. Providers are read-only after construction and safe to
share between threads.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .errors import MissingSidecar
from .raster_io import AttentionMap, Radiograph, read_attn


class AttentionProvider(ABC):
    """Deterministic source of one attention map per image."""

    @abstractmethod
    def attention_for(self, image: Radiograph) -> AttentionMap:
        """Return the saliency map for ``image``."""


@dataclass(frozen=True)
class FileProvider(AttentionProvider):
    """Reads a sidecar ATTN file located next to the image.

    The sidecar path is the image path with its extension replaced by
    ``suffix`` (default ``.attn``).
    """

    suffix: str = ".attn"

    def sidecar_path(self, image: Radiograph):
        if image.source is None:
            raise MissingSidecar("image has no source path to derive a sidecar from")
        return image.source.with_suffix(self.suffix)

    def attention_for(self, image: Radiograph) -> AttentionMap:
        sidecar = self.sidecar_path(image)
        if not sidecar.exists():
            raise MissingSidecar(f"no attention sidecar at {sidecar}")
        return read_attn(sidecar)


@dataclass(frozen=True)
class SyntheticProvider(AttentionProvider):
    """Local standard deviation over a (2r+1)^2 window, edges clamped.

    Flat detector background has zero local deviation while bone and soft
    tissue do not, which gives the pipeline a usable foreground signal with
    no model involved. Window sums use exact integer arithmetic, so the
    output is bit-identical under a constant intensity shift.
    """

    radius: int = 7

    def attention_for(self, image: Radiograph) -> AttentionMap:
        return AttentionMap(values=_local_std(image.pixels, self.radius))


def _box_sums(padded: np.ndarray, r: int) -> np.ndarray:
    """Sum over each (2r+1)^2 window of the unpadded image, exactly."""
    side = 2 * r + 1
    sat = np.zeros((padded.shape[0] + 1, padded.shape[1] + 1), dtype=np.int64)
    np.cumsum(np.cumsum(padded, axis=0), axis=1, out=sat[1:, 1:])
    return (
        sat[side:, side:]
        - sat[:-side, side:]
        - sat[side:, :-side]
        + sat[:-side, :-side]
    )


def _local_std(pixels: np.ndarray, r: int) -> np.ndarray:
    if r == 0:
        return np.zeros(pixels.shape, dtype=np.float32)
    values = pixels.astype(np.int64)
    padded = np.pad(values, r, mode="edge")
    s1 = _box_sums(padded, r)
    s2 = _box_sums(padded * padded, r)
    n = (2 * r + 1) ** 2
    # n*Var = n*E[x^2] - E[x]^2 scaled: integer, so invariant under x -> x+c
    numerator = n * s2 - s1 * s1
    return (np.sqrt(numerator.astype(np.float64)) / n).astype(np.float32)
