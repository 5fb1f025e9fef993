"""Pixel-level detection rate and false-detection rate against ground truth."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class GroundTruthMask:
    """Pixels of the tampered area C: source and pasted regions alike."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool)
        if bits.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {bits.shape}")
        object.__setattr__(self, "bits", bits)

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]


@dataclass(frozen=True)
class MetricsReport:
    """``d = |C & D| / |C|`` and ``f = |D - C| / |C|``, as fractions.

    ``f`` is not clamped and can exceed 1.
    """

    d: float
    f: float
    truth_pixels: int
    detected_pixels: int
    hit_pixels: int
    false_pixels: int

    @property
    def d_percent(self) -> float:
        return 100.0 * self.d

    @property
    def f_percent(self) -> float:
        return 100.0 * self.f

    def __str__(self) -> str:
        return f"d={self.d_percent:.4f} f={self.f_percent:.4f}"


def compute_metrics(detected, truth) -> MetricsReport:
    """Score a detection mask against ground truth.

    Both arguments may be mask objects with a ``bits`` attribute or plain
    boolean arrays. Raises ``ValueError`` on a size mismatch or an empty
    ground truth, where the rates are undefined.
    """
    dbits = np.asarray(getattr(detected, "bits", detected), dtype=bool)
    cbits = np.asarray(getattr(truth, "bits", truth), dtype=bool)
    if dbits.shape != cbits.shape:
        raise ValueError(f"mask sizes differ: detected {dbits.shape}, truth {cbits.shape}")
    c = int(np.count_nonzero(cbits))
    if c == 0:
        raise ValueError("ground truth is empty; detection rates are undefined")
    hit = int(np.count_nonzero(dbits & cbits))
    false = int(np.count_nonzero(dbits & ~cbits))
    return MetricsReport(
        d=hit / c,
        f=false / c,
        truth_pixels=c,
        detected_pixels=int(np.count_nonzero(dbits)),
        hit_pixels=hit,
        false_pixels=false,
    )
