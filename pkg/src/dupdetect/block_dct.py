"""Overlapping block extraction and the orthonormal 2-D DCT-II.

Index convention: a block origin is ``(row, col)``; inside a block the first
index runs down the rows and the second across the columns.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, NamedTuple, Sequence

import numpy as np


class BlockOrigin(NamedTuple):
    row: int
    col: int


@dataclass(frozen=True, eq=False)
class Block:
    origin: BlockOrigin
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class DctBlock:
    origin: BlockOrigin
    coeffs: np.ndarray


def _as_plane(plane) -> np.ndarray:
    arr = np.asarray(getattr(plane, "data", plane), dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a single 2-D plane, got shape {arr.shape}")
    return arr


def block_grid_shape(height: int, width: int, b: int) -> tuple[int, int]:
    """Number of block origins along each axis, ``(M - b + 1, N - b + 1)``."""
    if height < b or width < b:
        raise ValueError(f"plane {height}x{width} is smaller than block size {b}")
    return height - b + 1, width - b + 1


def extract_blocks(plane, b: int = 16) -> Iterator[Block]:
    """Yield every overlapping ``b x b`` block in row-major origin order."""
    arr = _as_plane(plane)
    rows, cols = block_grid_shape(*arr.shape, b)
    for i in range(rows):
        for j in range(cols):
            yield Block(BlockOrigin(i, j), arr[i:i + b, j:j + b])


@lru_cache(maxsize=None)
def dct_matrix(b: int) -> np.ndarray:
    """Orthonormal DCT-II basis; row ``u`` holds ``a(u) cos((2x+1) u pi / 2b)``."""
    x = np.arange(b)
    u = x[:, None]
    basis = np.cos((2 * x[None, :] + 1) * u * np.pi / (2 * b))
    basis *= np.sqrt(2.0 / b)
    basis[0] = np.sqrt(1.0 / b)
    basis.setflags(write=False)
    return basis


def _square(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise ValueError(f"block must be square, got shape {values.shape}")
    return values


def dct2(block: Block) -> DctBlock:
    values = _square(block.values)
    c = dct_matrix(values.shape[0])
    return DctBlock(block.origin, c @ values @ c.T)


def idct2(dct: DctBlock) -> Block:
    coeffs = _square(dct.coeffs)
    c = dct_matrix(coeffs.shape[0])
    return Block(dct.origin, c.T @ coeffs @ c)


def _correlate_valid(arr: np.ndarray, taps: np.ndarray, axis: int) -> np.ndarray:
    # Fixed summation order per output element, so equal windows give equal bits.
    n = arr.shape[axis] - len(taps) + 1
    out = np.zeros(arr.shape[:axis] + (n,) + arr.shape[axis + 1:])
    for k, w in enumerate(taps):
        window = arr[k:k + n] if axis == 0 else arr[:, k:k + n]
        out += w * window
    return out


def block_coefficients(plane, b: int, coeffs: Sequence[tuple[int, int]]) -> np.ndarray:
    """Selected DCT coefficients of every overlapping block at once.

    Returns an array of shape ``(len(coeffs), M - b + 1, N - b + 1)`` where
    entry ``[k, i, j]`` equals ``dct2(block at (i, j)).coeffs[coeffs[k]]``.
    Evaluated separably, one column pass and one row pass per coefficient.
    """
    arr = _as_plane(plane)
    rows, cols = block_grid_shape(*arr.shape, b)
    c = dct_matrix(b)
    out = np.empty((len(coeffs), rows, cols))
    col_pass = {}
    for k, (u, v) in enumerate(coeffs):
        if v not in col_pass:
            col_pass[v] = _correlate_valid(arr, c[v], axis=1)
        out[k] = _correlate_valid(col_pass[v], c[u], axis=0)
    return out


def block_means(plane, b: int) -> np.ndarray:
    """Mean of every overlapping block, shape ``(M - b + 1, N - b + 1)``."""
    arr = _as_plane(plane)
    block_grid_shape(*arr.shape, b)
    ones = np.ones(b)
    sums = _correlate_valid(_correlate_valid(arr, ones, axis=1), ones, axis=0)
    return sums / (b * b)
