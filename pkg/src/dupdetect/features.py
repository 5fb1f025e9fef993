"""Per-block feature vectors and the feature matrix they form."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Optional, Union

import numpy as np

from .block_dct import Block, BlockOrigin, block_coefficients, block_grid_shape, block_means, dct2
from .config import DetectorConfig
from .image_core import RasterImage, rgb_to_luma

N_FEATURES = 9


class FeatureVector(NamedTuple):
    """Luma DC and first two AC terms, RGB DC terms, then R, B, G block means."""

    v1: float  # CY(0, 0)
    v2: float  # CY(0, 1)
    v3: float  # CY(1, 0)
    v4: float  # CR(0, 0)
    v5: float  # CG(0, 0)
    v6: float  # CB(0, 0)
    v7: float  # mean R
    v8: float  # mean B
    v9: float  # mean G


class BlockRecord(NamedTuple):
    feature: FeatureVector
    origin: BlockOrigin


def block_features(r: Block, g: Block, bl: Block, y: Block) -> FeatureVector:
    blocks = (r, g, bl, y)
    origin = r.origin
    shape = np.shape(r.values)
    for blk in blocks[1:]:
        if blk.origin != origin:
            raise ValueError(f"block origins differ: {origin} vs {blk.origin}")
        if np.shape(blk.values) != shape:
            raise ValueError(f"block sizes differ: {shape} vs {np.shape(blk.values)}")
    cy = dct2(y).coeffs
    return FeatureVector(
        float(cy[0, 0]),
        float(cy[0, 1]),
        float(cy[1, 0]),
        float(dct2(r).coeffs[0, 0]),
        float(dct2(g).coeffs[0, 0]),
        float(dct2(bl).coeffs[0, 0]),
        float(np.mean(r.values)),
        float(np.mean(bl.values)),
        float(np.mean(g.values)),
    )


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Row ``k`` holds the nine features of the block at ``origins[k]``.

    Behaves as a sequence of :class:`BlockRecord`.
    """

    features: np.ndarray  # (n, 9) float64
    origins: np.ndarray  # (n, 2) int64, (row, col)

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        origins = np.asarray(self.origins, dtype=np.int64)
        if feats.ndim != 2 or feats.shape[1] != N_FEATURES:
            raise ValueError(f"features must be (n, {N_FEATURES}), got {feats.shape}")
        if origins.shape != (feats.shape[0], 2):
            raise ValueError(f"origins must be ({feats.shape[0]}, 2), got {origins.shape}")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "origins", origins)

    def __len__(self) -> int:
        return self.features.shape[0]

    def __getitem__(self, k: int) -> BlockRecord:
        return BlockRecord(
            FeatureVector(*map(float, self.features[k])),
            BlockOrigin(int(self.origins[k, 0]), int(self.origins[k, 1])),
        )

    def __iter__(self):
        return (self[k] for k in range(len(self)))

    def take(self, order: np.ndarray) -> "FeatureMatrix":
        return FeatureMatrix(self.features[order], self.origins[order])

    @classmethod
    def from_records(cls, records: Iterable[BlockRecord]) -> "FeatureMatrix":
        records = list(records)
        feats = np.array([tuple(r.feature) for r in records], dtype=np.float64).reshape(-1, N_FEATURES)
        origins = np.array([tuple(r.origin) for r in records], dtype=np.int64).reshape(-1, 2)
        return cls(feats, origins)


def build_feature_matrix(img: RasterImage, config: Optional[DetectorConfig] = None) -> FeatureMatrix:
    """Features of every overlapping block, in row-major origin order.

    Only the DCT coefficients the features read are evaluated; each equals
    the matching entry of :func:`~dupdetect.block_dct.dct2` on that block.
    """
    b = (config or DetectorConfig()).b
    rows, cols = block_grid_shape(img.height, img.width, b)
    r, g, bl = (img.channel(k) for k in range(3))
    y = rgb_to_luma(img)

    luma = block_coefficients(y, b, [(0, 0), (0, 1), (1, 0)])
    columns = [
        luma[0],
        luma[1],
        luma[2],
        block_coefficients(r, b, [(0, 0)])[0],
        block_coefficients(g, b, [(0, 0)])[0],
        block_coefficients(bl, b, [(0, 0)])[0],
        block_means(r, b),
        block_means(bl, b),
        block_means(g, b),
    ]
    feats = np.stack([c.ravel() for c in columns], axis=1)
    ii, jj = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
    origins = np.stack([ii.ravel(), jj.ravel()], axis=1)
    return FeatureMatrix(feats, origins)


def dump_csv(matrix: FeatureMatrix, path: Union[str, Path]) -> None:
    """Debug dump: origin row, origin col, v1..v9 per line."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "col"] + [f"v{k}" for k in range(1, N_FEATURES + 1)])
        for (row, col), feats in zip(matrix.origins.tolist(), matrix.features.tolist()):
            writer.writerow([row, col] + [repr(v) for v in feats])
