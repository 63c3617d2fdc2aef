import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sphereclip.modem import qam
from sphereclip.oracles import exhaustive_maxlog_llrs, exhaustive_ml_metric
from sphereclip.sphere_decoder import DetectionProblem, detect, detect_batch
from sphereclip.verify import random_problem


def bpsk_problem(clip=math.inf):
    return DetectionProblem(np.array([[1.0 + 0j]]), np.array([0.3 + 0j]), qam(2), 0.5, clip)


def with_clip(p, clip):
    return DetectionProblem(p.r, p.y_rot, p.constellation, p.sigma2, clip)


def test_bpsk_scalar_example():
    res = detect(bpsk_problem())
    # (0.3 + 1)^2 - (0.3 - 1)^2 over 2 sigma^2 = 1
    assert res.llrs[0] == pytest.approx(1.2, abs=1e-12)
    assert res.visited_nodes == 2
    assert res.ml_metric == pytest.approx(0.49)


def test_bpsk_clipped():
    assert detect(bpsk_problem(1.0)).llrs[0] == 1.0


@pytest.mark.parametrize(
    "order, m_t, count",
    [(4, 2, 50), (16, 2, 30), (64, 2, 10), (2, 4, 30), (16, 4, 3)],
)
def test_matches_exhaustive(order, m_t, count):
    for seed in range(count):
        p = random_problem(seed, order, m_t)
        res = detect(p)
        assert np.abs(res.llrs - exhaustive_maxlog_llrs(p)).max() <= 1e-9
        assert res.ml_metric == pytest.approx(exhaustive_ml_metric(p), abs=1e-9)
        assert res.visited_nodes >= m_t


def test_rectangular_channel():
    p = random_problem(3, 16, 3, m_r=5)
    assert np.abs(detect(p).llrs - exhaustive_maxlog_llrs(p)).max() <= 1e-9


@settings(max_examples=60, deadline=None)
@given(
    st.sampled_from([(4, 1), (4, 2), (4, 3), (16, 1), (16, 2), (2, 3)]),
    st.integers(0, 2**31),
    st.floats(0.0, 30.0),
)
def test_clip_equals_clamp_and_nodes_monotone(shape, seed, snr_db):
    order, m_t = shape
    p = random_problem(seed, order, m_t, snr_db=snr_db)
    full = detect(p)
    prev = full.visited_nodes
    for c in (8.0, 2.0, 0.5):
        res = detect(with_clip(p, c))
        target = np.clip(full.llrs, -c, c)
        assert np.abs(res.llrs - target).max() <= 1e-9
        assert np.array_equal(np.sign(res.llrs), np.sign(target))
        assert np.all(np.abs(res.llrs) <= c)
        assert res.visited_nodes <= prev
        prev = res.visited_nodes


def test_batch_matches_single_and_is_deterministic():
    c = qam(16)
    probs = [random_problem(s, 16, 4) for s in range(5)]
    r = np.stack([p.r for p in probs])
    y = np.stack([p.y_rot for p in probs])
    sigma2 = probs[0].sigma2
    a = detect_batch(r, y, c, sigma2, 3.0)
    b = detect_batch(r, y, c, sigma2, 3.0)
    for x, z in zip(a, b):
        assert x.tobytes() == z.tobytes()
    for u, p in enumerate(probs):
        res = detect(DetectionProblem(p.r, p.y_rot, c, sigma2, 3.0))
        assert np.array_equal(res.llrs, a[0][u]) and res.visited_nodes == a[1][u]


def test_symmetric_instance_gives_zero_llrs():
    p = DetectionProblem(np.eye(2, dtype=complex), np.zeros(2, dtype=complex), qam(4), 0.3)
    assert np.all(detect(p).llrs == 0)


def test_rejects_bad_clip():
    with pytest.raises(ValueError):
        detect(bpsk_problem(0.0))
