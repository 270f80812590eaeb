"""The ATTN sidecar format: how attention maps travel between tools.

The mask pipeline does not care where saliency comes from. Any producer
(a ViT feature extractor, a classical filter, a hand-drawn prior) can
drop a compact binary sidecar next to each image, and the pipeline picks
it up by file naming. This demo writes a coarse feature-grid map by
hand, shows the byte layout, and lets the pipeline consume it.

Run:  python3 demos/demo_attention_interchange.py
"""

import struct
from pathlib import Path

import numpy as np

from radprep import (
    AttentionMap,
    FileProvider,
    MaskParams,
    extract_roi,
    load_image,
    read_attn,
    write_attn,
    write_image,
)
from radprep.raster_io import Radiograph

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

# 1. an image on disk
rng = np.random.default_rng(3)
pixels = np.zeros((96, 96), dtype=np.uint16)
pixels[20:76, 24:72] = 1500 + rng.integers(0, 900, size=(56, 48))
write_image(Radiograph(pixels=pixels, bit_depth=12), OUT / "scan.png")

# 2. a coarse attention map at feature-grid resolution (say 23x23), the
#    shape a stride-4 ViT would emit for a 96px input
grid = np.zeros((23, 23), dtype=np.float32)
grid[5:18, 6:17] = 1.0
grid += rng.random((23, 23), dtype=np.float32) * 0.05
write_attn(AttentionMap(values=grid), OUT / "scan.attn")

# 3. the byte layout is trivial to audit
raw = (OUT / "scan.attn").read_bytes()
magic, version = raw[:4], raw[4]
width, height = struct.unpack_from("<II", raw, 5)
print(f"magic={magic!r} version={version} width={width} height={height} "
      f"payload={len(raw) - 13} bytes ({width}x{height} float32)")

first = struct.unpack_from("<f", raw, 13)[0]
print(f"first value on disk {first!r} == in memory {grid[0, 0]!r}: "
      f"{first == grid[0, 0]}")

# 4. round trip is bit-exact
back = read_attn(OUT / "scan.attn")
print("bit-exact roundtrip:", np.array_equal(back.values, grid))

# 5. the pipeline finds the sidecar by naming convention and upsamples the
#    coarse grid to image resolution internally
image = load_image(OUT / "scan.png")
mask = extract_roi(image, FileProvider(suffix=".attn"), MaskParams())
print(f"mask from sidecar: {mask.count()} foreground px at image resolution "
      f"({mask.height}x{mask.width})")
