import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from risbeam.beamforming import (
    compute_sinr,
    min_power_scaling,
    null_residual,
    project_power,
    stream_targets,
    total_power,
    zf_beamformer,
    zf_directions,
)
from risbeam.errors import InfeasibleError
from risbeam.numerics import make_rng, pseudo_inverse
from risbeam.scenario import GeometryConfig


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def sinr_double_loop(h, w, sigma2):
    """Direct evaluation of the SINR definition, one scalar at a time."""
    k_total = h.shape[0]
    out = []
    for k in range(k_total):
        signal = abs(sum(h[k, n] * w[n, k] for n in range(h.shape[1]))) ** 2
        interference = 0.0
        for i in range(k_total):
            if i != k:
                interference += abs(sum(h[k, n] * w[n, i] for n in range(h.shape[1]))) ** 2
        out.append(signal / (interference + sigma2))
    return np.array(out)


def test_zf_identity_channel():
    np.testing.assert_allclose(zf_directions(np.eye(2)), np.eye(2), atol=1e-15)


def test_zf_directions_match_pseudo_inverse(rng):
    h = crandn(rng, 3, 5)
    pinv = pseudo_inverse(h)
    pinv /= np.linalg.norm(pinv, axis=0)
    np.testing.assert_allclose(zf_directions(h), pinv, atol=1e-10)
    assert null_residual(h, zf_directions(h)) <= 1e-9


def test_zf_too_many_streams():
    h = crandn(make_rng(0), 51, 50)
    with pytest.raises(InfeasibleError, match="degrees of freedom"):
        zf_directions(h)


def test_zf_rank_deficient():
    h = np.vstack([np.ones(4), np.ones(4)])
    with pytest.raises(InfeasibleError, match="rank"):
        zf_directions(h)


@given(st.integers(0, 2**32 - 1), st.integers(2, 6), st.integers(0, 6))
def test_zf_null_residual_property(seed, k, extra):
    rng = make_rng(seed)
    n = k + min(extra, k)
    h = crandn(rng, k, n)
    w = zf_beamformer(h, 2.0, 0.1)
    assert null_residual(h, w) <= 1e-9
    np.testing.assert_allclose(compute_sinr(h, w, 0.1).sinr, 2.0, rtol=1e-6)


def test_min_power_single_stream():
    w = min_power_scaling(np.array([[1.0], [0.0]]), np.array([[1.0, 0.0]]), 1.0, 1.0)
    np.testing.assert_allclose(w, [[1.0], [0.0]])
    assert total_power(w) == pytest.approx(1.0)


def test_min_power_quadruple_gamma(rng):
    h = crandn(rng, 3, 5)
    d = zf_directions(h)
    p1 = np.sum(np.abs(min_power_scaling(d, h, 1.0, 0.5)) ** 2, axis=0)
    p4 = np.sum(np.abs(min_power_scaling(d, h, 4.0, 0.5)) ** 2, axis=0)
    np.testing.assert_allclose(p4, 4 * p1, rtol=1e-12)


def test_min_power_tight_sinr(rng):
    h = crandn(rng, 3, 5)
    w = zf_beamformer(h, 3.0, 0.2)
    np.testing.assert_allclose(sinr_double_loop(h, w, 0.2), 3.0, rtol=1e-6)


def test_min_power_per_stream_targets(rng):
    h = crandn(rng, 3, 6)
    targets = np.array([0.5, 1.0, 8.0])
    np.testing.assert_allclose(compute_sinr(h, zf_beamformer(h, targets, 1e-3), 1e-3).sinr,
                               targets, rtol=1e-9)


def test_min_power_orthogonal_direction_rejected():
    h = np.array([[1.0, 0.0]])
    with pytest.raises(InfeasibleError):
        min_power_scaling(np.array([[0.0], [1.0]]), h, 1.0, 1.0)


def test_min_power_is_optimal_within_zf(rng):
    h = crandn(rng, 4, 6)
    w = zf_beamformer(h, 1.0, 0.3)
    down = compute_sinr(h, 0.99 * w, 0.3).sinr
    assert np.all(down < 1.0)
    assert total_power(1.01 * w) > total_power(w)


def test_sinr_examples():
    h = np.eye(2, dtype=complex)
    rep = compute_sinr(h, np.eye(2), 1.0)
    np.testing.assert_allclose(rep.sinr, [1.0, 1.0])
    np.testing.assert_allclose(rep.db(), [0.0, 0.0], atol=1e-12)
    assert np.all(compute_sinr(h, np.zeros((2, 2)), 1.0).sinr == 0)
    with pytest.raises(ValueError):
        compute_sinr(h, np.zeros((3, 2)), 1.0)


@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(0, 3))
def test_sinr_matches_double_loop(seed, k, extra):
    rng = make_rng(seed)
    h, w = crandn(rng, k, k + extra), crandn(rng, k + extra, k)
    sigma2 = float(rng.uniform(0.01, 2.0))
    np.testing.assert_allclose(compute_sinr(h, w, sigma2).sinr, sinr_double_loop(h, w, sigma2),
                               rtol=1e-12)


@given(st.integers(0, 2**32 - 1), st.floats(0.01, 100.0))
def test_sinr_scale_consistent(seed, alpha):
    rng = make_rng(seed)
    h, w = crandn(rng, 3, 4), crandn(rng, 4, 3)
    a, b = compute_sinr(h, w, 1.0), compute_sinr(h, np.sqrt(alpha) * w, 1.0)
    np.testing.assert_allclose(b.signal, alpha * a.signal, rtol=1e-12)
    np.testing.assert_allclose(b.interference, alpha * a.interference, rtol=1e-12)


def test_sinr_report_consistent(rng):
    h, w = crandn(rng, 3, 4), crandn(rng, 4, 3)
    r = compute_sinr(h, w, 0.7)
    np.testing.assert_array_equal(r.sinr, r.signal / (r.interference + r.noise))


def test_total_power_examples(rng):
    assert total_power(np.zeros((3, 2))) == 0.0
    assert total_power(np.eye(3)[:, :2]) == pytest.approx(2.0)
    w = crandn(rng, 4, 3)
    assert total_power(w) == pytest.approx(sum(abs(x) ** 2 for x in w.ravel()), rel=1e-14)


def test_project_power_examples(rng):
    w = crandn(rng, 3, 2)
    w /= np.sqrt(total_power(w))
    assert project_power(w, 2.0) is w
    big = 2 * w
    np.testing.assert_allclose(project_power(big, 1.0), w, rtol=1e-15)
    with pytest.raises(ValueError):
        project_power(w, 0.0)


@given(st.integers(0, 2**32 - 1), st.floats(0.01, 10.0))
def test_project_power_properties(seed, budget):
    w = crandn(make_rng(seed), 5, 3)
    once = project_power(w, budget)
    assert total_power(once) == pytest.approx(min(total_power(w), budget), rel=1e-12)
    np.testing.assert_allclose(project_power(once, budget), once, rtol=1e-12)


def test_stream_targets():
    cfg = GeometryConfig(gamma_min_db=10.0, uplink_gamma_min_db=0.0, k_ue=2)
    np.testing.assert_allclose(stream_targets(cfg), [1.0, 10.0, 10.0])
