import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dupdetect.matching import DetectionMask
from dupdetect.metrics import GroundTruthMask, compute_metrics


def naive_counts(detected, truth):
    c = hit = false = 0
    for d, t in zip(detected.ravel().tolist(), truth.ravel().tolist()):
        c += t
        hit += d and t
        false += d and not t
    return hit / c, false / c


def test_perfect():
    t = np.zeros((10, 10), bool)
    t[2:5, 2:5] = True
    r = compute_metrics(DetectionMask(t), GroundTruthMask(t))
    assert (r.d, r.f) == (1.0, 0.0)
    assert str(r) == "d=100.0000 f=0.0000"


def test_counting_example():
    truth = np.zeros((20, 20), bool)
    truth[:10, :10] = True
    det = np.zeros_like(truth)
    det.ravel()[np.flatnonzero(truth.ravel())[:90]] = True
    det[15, :10] = True
    r = compute_metrics(det, truth)
    assert (r.d, r.f) == pytest.approx((0.90, 0.10))
    assert (r.truth_pixels, r.hit_pixels, r.false_pixels, r.detected_pixels) == (100, 90, 10, 100)


def test_nothing_detected():
    truth = np.eye(8, dtype=bool)
    r = compute_metrics(np.zeros((8, 8), bool), truth)
    assert (r.d, r.f) == (0.0, 0.0)


def test_f_not_clamped():
    truth = np.zeros((10, 10), bool)
    truth[0, 0] = True
    r = compute_metrics(np.ones((10, 10), bool), truth)
    assert r.f == 99.0 and r.f_percent == 9900.0


def test_errors():
    with pytest.raises(ValueError, match="differ"):
        compute_metrics(np.zeros((4, 4), bool), np.ones((4, 5), bool))
    with pytest.raises(ValueError, match="empty"):
        compute_metrics(np.zeros((4, 4), bool), np.zeros((4, 4), bool))


def test_paper_table_formatting():
    r = compute_metrics(np.ones((1, 1), bool), np.ones((1, 1), bool))
    assert f"{97.4390:.4f}" == "97.4390"
    assert f"{r.d_percent:.4f}" == "100.0000"


masks = arrays(bool, st.tuples(st.integers(1, 12), st.integers(1, 12)))


@settings(max_examples=100)
@given(masks, st.integers(0, 2**31))
def test_matches_naive_count(det, seed):
    truth = np.random.default_rng(seed).random(det.shape) < 0.4
    truth.ravel()[0] = True
    r = compute_metrics(det, truth)
    d, f = naive_counts(det, truth)
    assert (r.d, r.f) == (d, f)


@settings(max_examples=60)
@given(masks, st.integers(0, 2**31))
def test_monotone_under_added_detections(det, seed):
    rng = np.random.default_rng(seed)
    truth = rng.random(det.shape) < 0.5
    truth.ravel()[-1] = True
    more = det | (rng.random(det.shape) < 0.3)
    a, b = compute_metrics(det, truth), compute_metrics(more, truth)
    assert b.d >= a.d and b.f >= a.f


@settings(max_examples=40)
@given(masks, st.integers(0, 3), st.integers(0, 3))
def test_translation_invariance(det, dr, dc):
    truth = np.ones(det.shape, bool)
    truth[::2] = False
    truth[0, 0] = True
    pad = lambda m: np.pad(m, ((dr, 3 - dr), (dc, 3 - dc)))
    a, b = compute_metrics(det, truth), compute_metrics(pad(det), pad(truth))
    assert (a.d, a.f) == (b.d, b.f)
