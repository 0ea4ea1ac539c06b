"""Hierarchical-transformer binary segmenter in six size variants.

Four-stage encoder (overlapped patch embedding, spatial-reduction attention,
depthwise-conv mix FFN) with a lightweight all-MLP decoder; variants B0-B5
scale encoder depth and width only, spanning roughly 3.8M to 85M parameters.
"""

from __future__ import annotations

import torch
import torch.nn as nn
import torch.nn.functional as F

VARIANTS = {
    # embed dims, depths, decoder dim
    "B0": ([32, 64, 160, 256], [2, 2, 2, 2], 256),
    "B1": ([64, 128, 320, 512], [2, 2, 2, 2], 256),
    "B2": ([64, 128, 320, 512], [3, 4, 6, 3], 768),
    "B3": ([64, 128, 320, 512], [3, 4, 18, 3], 768),
    "B4": ([64, 128, 320, 512], [3, 8, 27, 3], 768),
    "B5": ([64, 128, 320, 512], [3, 6, 40, 3], 768),
}
NUM_HEADS = [1, 2, 5, 8]
SR_RATIOS = [8, 4, 2, 1]
MLP_RATIO = 4


class OverlapPatchEmbed(nn.Module):
    def __init__(self, in_ch, dim, patch, stride):
        super().__init__()
        self.proj = nn.Conv2d(in_ch, dim, patch, stride=stride, padding=patch // 2)
        self.norm = nn.LayerNorm(dim)

    def forward(self, x):
        x = self.proj(x)
        _, _, h, w = x.shape
        x = x.flatten(2).transpose(1, 2)
        return self.norm(x), h, w


class SpatialReductionAttention(nn.Module):
    def __init__(self, dim, heads, sr_ratio):
        super().__init__()
        self.heads = heads
        self.scale = (dim // heads) ** -0.5
        self.q = nn.Linear(dim, dim)
        self.kv = nn.Linear(dim, dim * 2)
        self.proj = nn.Linear(dim, dim)
        self.sr_ratio = sr_ratio
        if sr_ratio > 1:
            self.sr = nn.Conv2d(dim, dim, sr_ratio, stride=sr_ratio)
            self.norm = nn.LayerNorm(dim)

    def forward(self, x, h, w):
        b, n, c = x.shape
        q = self.q(x).reshape(b, n, self.heads, c // self.heads).permute(0, 2, 1, 3)
        if self.sr_ratio > 1:
            xr = x.transpose(1, 2).reshape(b, c, h, w)
            xr = self.sr(xr).reshape(b, c, -1).transpose(1, 2)
            xr = self.norm(xr)
        else:
            xr = x
        kv = self.kv(xr).reshape(b, -1, 2, self.heads, c // self.heads).permute(2, 0, 3, 1, 4)
        k, v = kv[0], kv[1]
        attn = (q @ k.transpose(-2, -1)) * self.scale
        out = (attn.softmax(dim=-1) @ v).transpose(1, 2).reshape(b, n, c)
        return self.proj(out)


class MixFFN(nn.Module):
    def __init__(self, dim, hidden):
        super().__init__()
        self.fc1 = nn.Linear(dim, hidden)
        self.dw = nn.Conv2d(hidden, hidden, 3, padding=1, groups=hidden)
        self.fc2 = nn.Linear(hidden, dim)

    def forward(self, x, h, w):
        x = self.fc1(x)
        b, n, c = x.shape
        x = x.transpose(1, 2).reshape(b, c, h, w)
        x = self.dw(x)
        x = x.flatten(2).transpose(1, 2)
        return self.fc2(F.gelu(x))


class Block(nn.Module):
    def __init__(self, dim, heads, sr_ratio):
        super().__init__()
        self.norm1 = nn.LayerNorm(dim)
        self.attn = SpatialReductionAttention(dim, heads, sr_ratio)
        self.norm2 = nn.LayerNorm(dim)
        self.ffn = MixFFN(dim, dim * MLP_RATIO)

    def forward(self, x, h, w):
        x = x + self.attn(self.norm1(x), h, w)
        x = x + self.ffn(self.norm2(x), h, w)
        return x


class Segmenter(nn.Module):
    """Encoder-decoder binary segmenter; forward returns (B, 2, H, W) logits."""

    def __init__(self, variant: str = "B0", num_classes: int = 2):
        super().__init__()
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}; choose from {sorted(VARIANTS)}")
        dims, depths, dec_dim = VARIANTS[variant]
        self.variant = variant
        self.patch_embeds = nn.ModuleList()
        self.stages = nn.ModuleList()
        self.norms = nn.ModuleList()
        in_ch = 3
        for i, (dim, depth) in enumerate(zip(dims, depths)):
            patch, stride = (7, 4) if i == 0 else (3, 2)
            self.patch_embeds.append(OverlapPatchEmbed(in_ch, dim, patch, stride))
            self.stages.append(nn.ModuleList([Block(dim, NUM_HEADS[i], SR_RATIOS[i]) for _ in range(depth)]))
            self.norms.append(nn.LayerNorm(dim))
            in_ch = dim
        self.linear_c = nn.ModuleList([nn.Linear(d, dec_dim) for d in dims])
        self.fuse = nn.Conv2d(dec_dim * 4, dec_dim, 1)
        self.fuse_bn = nn.BatchNorm2d(dec_dim)
        self.classifier = nn.Conv2d(dec_dim, num_classes, 1)

    def forward(self, x):
        b, _, H, W = x.shape
        feats = []
        for embed, blocks, norm in zip(self.patch_embeds, self.stages, self.norms):
            x, h, w = embed(x)
            for blk in blocks:
                x = blk(x, h, w)
            x = norm(x)
            x = x.transpose(1, 2).reshape(b, -1, h, w)
            feats.append(x)
        target = feats[0].shape[2:]
        merged = []
        for feat, lin in zip(feats, self.linear_c):
            bb, c, h, w = feat.shape
            y = lin(feat.flatten(2).transpose(1, 2)).transpose(1, 2).reshape(bb, -1, h, w)
            if (h, w) != target:
                y = F.interpolate(y, size=target, mode="bilinear", align_corners=False)
            merged.append(y)
        y = self.fuse(torch.cat(merged, dim=1))
        y = F.relu(self.fuse_bn(y))
        logits = self.classifier(y)
        return F.interpolate(logits, size=(H, W), mode="bilinear", align_corners=False)


def parameter_count(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())


def build(variant: str) -> Segmenter:
    return Segmenter(variant)
