"""Run the ViT on radiographs and export class-token attention maps.

Interchange format (bit-exact): magic "ATTN", version byte 0x01, u32-LE
width, u32-LE height, then width*height IEEE-754 32-bit LE floats in
row-major order. One file per image for the head-averaged map;
``<stem>.h<k>.attn`` per head when requested.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image, UnidentifiedImageError

from .errors import ImageUnreadable, WeightsUnavailable
from .vit import VisionTransformer, feature_grid_dims

# normalization published with the pretrained backbone (ImageNet statistics)
IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)

PATCH_SIZE = 8
STRIDE = 4
NUM_HEADS = 6

WEIGHTS_URL = (
    "https://dl.fbaipublicfiles.com/dino/dino_deitsmall8_pretrain/"
    "dino_deitsmall8_pretrain.pth"
)


@dataclass(frozen=True)
class ExtractorConfig:
    """Fixed model family (ViT-S/8, stride 4, last layer, head mean).

    ``resize_target``: longest side after aspect-preserving resize, with
    both sides snapped to multiples of the stride; 0 keeps the original
    size. ``weights``: checkpoint path; with ``allow_random`` a seeded
    random initialization stands in (format/contract testing only).
    """

    resize_target: int = 518
    weights: Path | None = None
    allow_random: bool = False
    seed: int = 0


def aligned_size(height: int, width: int, target: int, stride: int = STRIDE):
    """Aspect-preserving resize of the longest side, snapped to the stride."""
    if target <= 0:
        return height, width
    scale = target / max(height, width)
    def snap(side):
        scaled = max(PATCH_SIZE, side * scale)
        return max(PATCH_SIZE, int(round(scaled / stride)) * stride)
    return snap(height), snap(width)


def load_image_tensor(path, resize_target: int) -> torch.Tensor:
    """Grayscale image file -> normalized (1, 3, H, W) float tensor."""
    path = Path(path)
    if not path.exists():
        raise ImageUnreadable(f"{path}: no such file")
    with path.open("rb") as fh:
        head = fh.read(2)
    if path.suffix.lower() == ".pgm" or head == b"P5":
        gray, max_value = _read_pgm(path)
    else:
        try:
            with Image.open(path) as im:
                if im.mode == "L":
                    max_value = 255.0
                elif im.mode in ("I;16", "I;16B", "I;16L", "I"):
                    max_value = 65535.0
                else:
                    raise ImageUnreadable(f"{path}: need single-channel input, got {im.mode}")
                gray = np.asarray(im, dtype=np.float32)
        except (UnidentifiedImageError, OSError, SyntaxError) as exc:
            raise ImageUnreadable(f"{path}: {exc}") from exc
    gray = gray / max_value
    tensor = torch.from_numpy(gray)[None, None]
    h, w = aligned_size(gray.shape[0], gray.shape[1], resize_target)
    if (h, w) != gray.shape:
        tensor = torch.nn.functional.interpolate(
            tensor, size=(h, w), mode="bilinear", align_corners=False
        )
    rgb = tensor.repeat(1, 3, 1, 1)  # replicate gray into the 3 trained channels
    mean = torch.tensor(IMAGENET_MEAN).view(1, 3, 1, 1)
    std = torch.tensor(IMAGENET_STD).view(1, 3, 1, 1)
    return (rgb - mean) / std


def _read_pgm(path: Path):
    data = path.read_bytes()
    if data[:2] != b"P5":
        raise ImageUnreadable(f"{path}: not a binary PGM")
    fields, pos = [], 2
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] not in (0x0A, 0x0D):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    try:
        width, height, maxval = (int(f) for f in fields)
    except ValueError as exc:
        raise ImageUnreadable(f"{path}: bad PGM header") from exc
    pos += 1
    dtype = ">u2" if maxval > 255 else np.uint8
    need = width * height * (2 if maxval > 255 else 1)
    payload = data[pos : pos + need]
    if len(payload) < need:
        raise ImageUnreadable(f"{path}: truncated PGM payload")
    gray = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    return gray.astype(np.float32), float(maxval)


def build_model(config: ExtractorConfig) -> VisionTransformer:
    """Instantiate ViT-S/8 and load weights (or seeded random init)."""
    model = VisionTransformer(patch_size=PATCH_SIZE, stride=STRIDE)
    if config.weights is not None:
        path = Path(config.weights)
        if not path.exists():
            raise WeightsUnavailable(f"checkpoint not found: {path}")
        state = torch.load(path, map_location="cpu", weights_only=True)
        if isinstance(state, dict) and "state_dict" in state:
            state = state["state_dict"]
        state = {k: v for k, v in state.items() if not k.startswith("head.")}
        missing, unexpected = model.load_state_dict(state, strict=False)
        if missing:
            raise WeightsUnavailable(f"{path}: missing parameters {sorted(missing)[:5]}...")
    elif config.allow_random:
        generator = torch.Generator().manual_seed(config.seed)
        with torch.no_grad():
            for p in model.parameters():
                p.copy_(torch.randn(p.shape, generator=generator) * 0.02)
    else:
        raise WeightsUnavailable(
            "no checkpoint given; pass --weights <file> "
            f"(pretrained backbone: {WEIGHTS_URL}) or --allow-random-weights"
        )
    model.eval()
    for p in model.parameters():
        p.requires_grad_(False)
    return model


@torch.no_grad()
def class_attention(model: VisionTransformer, tensor: torch.Tensor) -> np.ndarray:
    """Per-head class-token attention over spatial tokens, (heads, gh, gw)."""
    attn, (gh, gw) = model.forward_last_attention(tensor)
    expected = feature_grid_dims(tensor.shape[-2], tensor.shape[-1])
    assert (gh, gw) == expected, (gh, gw, expected)
    cls_row = attn[0, :, 0, 1:]  # attention from cls to each spatial token
    return cls_row.reshape(model.num_heads, gh, gw).cpu().numpy().astype(np.float32)


def write_attn_file(values: np.ndarray, path) -> None:
    height, width = values.shape
    header = b"ATTN" + bytes([1]) + struct.pack("<II", width, height)
    Path(path).write_bytes(header + values.astype("<f4", copy=False).tobytes())


def extract(image_path, out_path, config: ExtractorConfig, model=None) -> Path:
    """Write the head-averaged class-token attention map as an ATTN file."""
    model = model if model is not None else build_model(config)
    tensor = load_image_tensor(image_path, config.resize_target)
    heads = class_attention(model, tensor)
    write_attn_file(heads.mean(axis=0), out_path)
    return Path(out_path)


def extract_heads(image_path, out_dir, config: ExtractorConfig, model=None) -> list[Path]:
    """Write one ATTN file per attention head, suffixed ``.h<k>.attn``."""
    model = model if model is not None else build_model(config)
    tensor = load_image_tensor(image_path, config.resize_target)
    heads = class_attention(model, tensor)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(image_path).stem
    paths = []
    for k in range(heads.shape[0]):
        path = out_dir / f"{stem}.h{k}.attn"
        write_attn_file(heads[k], path)
        paths.append(path)
    return paths
