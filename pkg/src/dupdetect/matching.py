"""Lexicographic matching, shift-vector voting and mask rendering."""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Optional, Union

import numpy as np

from .block_dct import BlockOrigin
from .config import DetectorConfig, worker_count
from .features import BlockRecord, FeatureMatrix, build_feature_matrix
from .image_core import RasterImage

Shift = tuple[int, int]


class CandidatePair(NamedTuple):
    origin_a: BlockOrigin
    origin_b: BlockOrigin
    shift: Shift
    feature_distance: float


@dataclass(frozen=True, eq=False)
class CandidateSet:
    """Columnar store of candidate pairs; iterates as :class:`CandidatePair`.

    Pairs are canonical: ``origin_a`` precedes ``origin_b`` in raster order.
    """

    origin_a: np.ndarray  # (n, 2)
    origin_b: np.ndarray  # (n, 2)
    distance: np.ndarray  # (n,)
    signed: bool = False

    @classmethod
    def empty(cls, signed: bool = False) -> "CandidateSet":
        z = np.zeros((0, 2), dtype=np.int64)
        return cls(z, z.copy(), np.zeros(0), signed)

    @property
    def shift(self) -> np.ndarray:
        delta = self.origin_b - self.origin_a
        return delta if self.signed else np.abs(delta)

    def __len__(self) -> int:
        return self.distance.shape[0]

    def __iter__(self) -> Iterator[CandidatePair]:
        shifts = self.shift.tolist()
        for a, b, s, d in zip(self.origin_a.tolist(), self.origin_b.tolist(), shifts, self.distance.tolist()):
            yield CandidatePair(BlockOrigin(*a), BlockOrigin(*b), tuple(s), d)

    def subset(self, index: np.ndarray) -> "CandidateSet":
        return CandidateSet(self.origin_a[index], self.origin_b[index], self.distance[index], self.signed)

    def origin_pairs(self) -> set[tuple[BlockOrigin, BlockOrigin]]:
        return {(p.origin_a, p.origin_b) for p in self}


@dataclass(frozen=True, eq=False)
class ShiftHistogram:
    """Candidate pairs grouped by shift vector."""

    pairs: CandidateSet
    groups: dict[Shift, np.ndarray] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.groups)

    def __iter__(self) -> Iterator[Shift]:
        return iter(self.groups)

    def __contains__(self, shift) -> bool:
        return tuple(shift) in self.groups

    def __getitem__(self, shift) -> CandidateSet:
        return self.pairs.subset(self.groups[tuple(shift)])

    def count(self, shift) -> int:
        idx = self.groups.get(tuple(shift))
        return 0 if idx is None else len(idx)

    def counts(self) -> dict[Shift, int]:
        return {s: len(idx) for s, idx in self.groups.items()}


@dataclass(frozen=True, eq=False)
class DetectionMask:
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

    def count(self) -> int:
        return int(self.bits.sum())

    def any(self) -> bool:
        return bool(self.bits.any())


@dataclass
class DetectionReport:
    width: int
    height: int
    config: DetectorConfig
    n_blocks: int
    n_candidates: int
    n_confirmed: int
    shifts: list[tuple[Shift, int]]
    mask_pixels: int
    timings: dict[str, float]

    @property
    def duplicated(self) -> bool:
        return self.mask_pixels > 0

    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "config": self.config.to_dict(),
            "blocks": self.n_blocks,
            "candidate_pairs": self.n_candidates,
            "confirmed_pairs": self.n_confirmed,
            "shift_vectors": [{"shift": list(s), "count": c} for s, c in self.shifts],
            "mask_pixels": self.mask_pixels,
            "duplicated": self.duplicated,
            "timings_s": self.timings,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _as_matrix(records: Union[FeatureMatrix, Iterable[BlockRecord]]) -> FeatureMatrix:
    if isinstance(records, FeatureMatrix):
        return records
    return FeatureMatrix.from_records(records)


def lex_sort(records: Union[FeatureMatrix, Iterable[BlockRecord]]) -> FeatureMatrix:
    """Sort by v1, then v2 ... v9; ties fall back to origin row, then column."""
    matrix = _as_matrix(records)
    if len(matrix) == 0:
        raise ValueError("nothing to sort")
    f, o = matrix.features, matrix.origins
    # np.lexsort treats the last key as primary
    keys = (o[:, 1], o[:, 0]) + tuple(f[:, k] for k in range(f.shape[1] - 1, -1, -1))
    return matrix.take(np.lexsort(keys))


def _window_pairs(features: np.ndarray, start: int, stop: int, t_n: int, t_l: float):
    """Pairs (i, i + k), start <= i < stop, 1 <= k <= t_n, with distance < t_l."""
    n = features.shape[0]
    firsts, seconds, dists = [], [], []
    for k in range(1, t_n + 1):
        hi = min(stop, n - k)
        if hi <= start:
            break
        i = np.arange(start, hi)
        d = np.sqrt(np.sum((features[start + k:hi + k] - features[start:hi]) ** 2, axis=1))
        hit = d < t_l
        firsts.append(i[hit])
        seconds.append(i[hit] + k)
        dists.append(d[hit])
    if not firsts:
        return np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0)
    return np.concatenate(firsts), np.concatenate(seconds), np.concatenate(dists)


def find_candidates(
    sorted_records: FeatureMatrix,
    config: Optional[DetectorConfig] = None,
    workers: Optional[int] = 1,
) -> CandidateSet:
    """Compare each sorted row with the next ``t_n`` rows.

    Rows closer than ``t_l`` (Euclidean over all nine features) become
    candidate pairs. Pairs are deduplicated by unordered origin pair and
    returned sorted by ``(origin_a, origin_b)``, so the result does not depend
    on ``workers``.
    """
    config = config or DetectorConfig()
    matrix = _as_matrix(sorted_records)
    n = len(matrix)
    feats = matrix.features
    nworkers = worker_count(workers)
    if nworkers == 1 or n < 4096:
        parts = [_window_pairs(feats, 0, n, config.t_n, config.t_l)]
    else:
        bounds = np.linspace(0, n, nworkers + 1).astype(int)
        with ThreadPoolExecutor(nworkers) as pool:
            parts = list(pool.map(
                lambda se: _window_pairs(feats, se[0], se[1], config.t_n, config.t_l),
                zip(bounds[:-1], bounds[1:]),
            ))
    first = np.concatenate([p[0] for p in parts])
    second = np.concatenate([p[1] for p in parts])
    dist = np.concatenate([p[2] for p in parts])
    if first.size == 0:
        return CandidateSet.empty(config.signed_shift)

    oa, ob = matrix.origins[first], matrix.origins[second]
    swap = (ob[:, 0] < oa[:, 0]) | ((ob[:, 0] == oa[:, 0]) & (ob[:, 1] < oa[:, 1]))
    lo = np.where(swap[:, None], ob, oa)
    hi = np.where(swap[:, None], oa, ob)
    keep = np.any(lo != hi, axis=1)
    lo, hi, dist = lo[keep], hi[keep], dist[keep]

    key = np.concatenate([lo, hi], axis=1)
    _, idx = np.unique(key, axis=0, return_index=True)
    return CandidateSet(lo[idx], hi[idx], dist[idx], config.signed_shift)


def accumulate_shifts(pairs: CandidateSet) -> ShiftHistogram:
    if len(pairs) == 0:
        return ShiftHistogram(pairs, {})
    shifts, inverse = np.unique(pairs.shift, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    order = np.argsort(inverse, kind="stable")
    splits = np.cumsum(np.bincount(inverse, minlength=len(shifts)))[:-1]
    groups = {
        (int(s[0]), int(s[1])): idx
        for s, idx in zip(shifts, np.split(order, splits))
    }
    return ShiftHistogram(pairs, groups)


def confirm_regions(hist: ShiftHistogram, config: Optional[DetectorConfig] = None) -> CandidateSet:
    """Keep pairs whose shift has more than ``t_s`` votes and length above ``t_2``."""
    config = config or DetectorConfig()
    kept = [
        idx for shift, idx in hist.groups.items()
        if len(idx) > config.t_s and np.hypot(*shift) > config.t_2
    ]
    if not kept:
        return CandidateSet.empty(hist.pairs.signed)
    return hist.pairs.subset(np.sort(np.concatenate(kept)))


def render_mask(
    confirmed: CandidateSet, config: Optional[DetectorConfig], width: int, height: int
) -> DetectionMask:
    """Mark both ``b x b`` blocks of every confirmed pair."""
    b = (config or DetectorConfig()).b
    if width <= 0 or height <= 0:
        raise ValueError("mask dimensions must be positive")
    cover = np.zeros((height + 1, width + 1), dtype=np.int64)
    if len(confirmed):
        origins = np.unique(np.concatenate([confirmed.origin_a, confirmed.origin_b]), axis=0)
        r, c = origins[:, 0], origins[:, 1]
        if r.min() < 0 or c.min() < 0 or r.max() + b > height or c.max() + b > width:
            raise ValueError("confirmed block lies outside the image")
        np.add.at(cover, (r, c), 1)
        np.add.at(cover, (r + b, c), -1)
        np.add.at(cover, (r, c + b), -1)
        np.add.at(cover, (r + b, c + b), 1)
        cover = cover.cumsum(axis=0).cumsum(axis=1)
    return DetectionMask(cover[:height, :width] > 0)


def detect(
    img: RasterImage, config: Optional[DetectorConfig] = None, workers: Optional[int] = 1
) -> tuple[DetectionMask, DetectionReport]:
    config = config or DetectorConfig()
    timings = {}

    t0 = time.perf_counter()
    matrix = build_feature_matrix(img, config)
    t1 = time.perf_counter()
    timings["features"] = t1 - t0
    ordered = lex_sort(matrix)
    t2 = time.perf_counter()
    timings["sort"] = t2 - t1
    pairs = find_candidates(ordered, config, workers)
    t3 = time.perf_counter()
    timings["match"] = t3 - t2
    hist = accumulate_shifts(pairs)
    confirmed = confirm_regions(hist, config)
    t4 = time.perf_counter()
    timings["vote"] = t4 - t3
    mask = render_mask(confirmed, config, img.width, img.height)
    timings["render"] = time.perf_counter() - t4
    timings["total"] = time.perf_counter() - t0

    confirmed_hist = accumulate_shifts(confirmed)
    shifts = sorted(confirmed_hist.counts().items(), key=lambda kv: (-kv[1], kv[0]))
    report = DetectionReport(
        width=img.width,
        height=img.height,
        config=config,
        n_blocks=len(matrix),
        n_candidates=len(pairs),
        n_confirmed=len(confirmed),
        shifts=shifts,
        mask_pixels=mask.count(),
        timings=timings,
    )
    return mask, report
