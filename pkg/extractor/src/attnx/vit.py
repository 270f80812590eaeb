"""Minimal ViT-S/8 with an adjustable patch-embedding stride.

Parameter names match the published self-distilled ViT-S/8 checkpoints
(``cls_token``, ``pos_embed``, ``patch_embed.proj.*``, ``blocks.N.*``,
``norm.*``), so a downloaded backbone state dict loads directly. The
forward pass exposed here returns the softmax attention of the final
block, which is all the extractor needs.

Overlapping patches: the 8x8 patch projection is evaluated every
``stride`` pixels (default 4), giving a token grid of
``floor((H - 8) / stride) + 1`` by ``floor((W - 8) / stride) + 1``.
The position embeddings trained on the coarser non-overlapping grid are
bicubically resampled onto the denser grid.
"""

from __future__ import annotations

import math

import torch
import torch.nn as nn
import torch.nn.functional as F


class Mlp(nn.Module):
    def __init__(self, dim, hidden):
        super().__init__()
        self.fc1 = nn.Linear(dim, hidden)
        self.act = nn.GELU()
        self.fc2 = nn.Linear(hidden, dim)

    def forward(self, x):
        return self.fc2(self.act(self.fc1(x)))


class Attention(nn.Module):
    def __init__(self, dim, num_heads):
        super().__init__()
        self.num_heads = num_heads
        self.scale = (dim // num_heads) ** -0.5
        self.qkv = nn.Linear(dim, dim * 3, bias=True)
        self.proj = nn.Linear(dim, dim)

    def forward(self, x):
        b, n, c = x.shape
        qkv = self.qkv(x).reshape(b, n, 3, self.num_heads, c // self.num_heads)
        q, k, v = qkv.permute(2, 0, 3, 1, 4).unbind(0)
        attn = (q @ k.transpose(-2, -1)) * self.scale
        attn = attn.softmax(dim=-1)
        out = (attn @ v).transpose(1, 2).reshape(b, n, c)
        return self.proj(out), attn


class Block(nn.Module):
    def __init__(self, dim, num_heads, mlp_ratio):
        super().__init__()
        self.norm1 = nn.LayerNorm(dim)
        self.attn = Attention(dim, num_heads)
        self.norm2 = nn.LayerNorm(dim)
        self.mlp = Mlp(dim, int(dim * mlp_ratio))

    def forward(self, x):
        attended, attn = self.attn(self.norm1(x))
        x = x + attended
        x = x + self.mlp(self.norm2(x))
        return x, attn


class PatchEmbed(nn.Module):
    def __init__(self, patch_size, stride, in_chans, embed_dim):
        super().__init__()
        self.patch_size = patch_size
        self.stride = stride
        self.proj = nn.Conv2d(in_chans, embed_dim, kernel_size=patch_size, stride=stride)

    def forward(self, x):
        x = self.proj(x)  # (B, D, gh, gw)
        gh, gw = x.shape[-2:]
        return x.flatten(2).transpose(1, 2), (gh, gw)


class VisionTransformer(nn.Module):
    def __init__(
        self,
        patch_size: int = 8,
        stride: int = 4,
        embed_dim: int = 384,
        depth: int = 12,
        num_heads: int = 6,
        mlp_ratio: float = 4.0,
        trained_grid: int = 28,  # 224 / 8 from pretraining
    ):
        super().__init__()
        self.num_heads = num_heads
        self.trained_grid = trained_grid
        self.patch_embed = PatchEmbed(patch_size, stride, 3, embed_dim)
        self.cls_token = nn.Parameter(torch.zeros(1, 1, embed_dim))
        self.pos_embed = nn.Parameter(torch.zeros(1, 1 + trained_grid**2, embed_dim))
        self.blocks = nn.ModuleList(
            Block(embed_dim, num_heads, mlp_ratio) for _ in range(depth)
        )
        self.norm = nn.LayerNorm(embed_dim)
        nn.init.trunc_normal_(self.pos_embed, std=0.02)
        nn.init.trunc_normal_(self.cls_token, std=0.02)

    def _positions_for(self, gh: int, gw: int) -> torch.Tensor:
        cls_pos = self.pos_embed[:, :1]
        grid_pos = self.pos_embed[:, 1:]
        if gh == self.trained_grid and gw == self.trained_grid:
            return torch.cat([cls_pos, grid_pos], dim=1)
        dim = grid_pos.shape[-1]
        grid = grid_pos.reshape(1, self.trained_grid, self.trained_grid, dim)
        grid = grid.permute(0, 3, 1, 2)
        grid = F.interpolate(grid, size=(gh, gw), mode="bicubic", align_corners=False)
        grid = grid.permute(0, 2, 3, 1).reshape(1, gh * gw, dim)
        return torch.cat([cls_pos, grid], dim=1)

    def forward_last_attention(self, x: torch.Tensor):
        """Return the final block's attention, (B, heads, N+1, N+1), plus grid dims."""
        tokens, (gh, gw) = self.patch_embed(x)
        cls = self.cls_token.expand(tokens.shape[0], -1, -1)
        x = torch.cat([cls, tokens], dim=1) + self._positions_for(gh, gw)
        attn = None
        for block in self.blocks:
            x, attn = block(x)
        return attn, (gh, gw)


def feature_grid_dims(height: int, width: int, patch_size: int = 8, stride: int = 4):
    """Token grid dimensions: floor((side - patch) / stride) + 1 each."""
    if height < patch_size or width < patch_size:
        raise ValueError(f"input {height}x{width} smaller than the {patch_size}px patch")
    return (
        math.floor((height - patch_size) / stride) + 1,
        math.floor((width - patch_size) / stride) + 1,
    )
