import math

import numpy as np
import pytest
from scipy.stats import multivariate_normal

from multibubble.errors import DomainError, InvalidDimensionError
from multibubble.gauss import (McSpec, Phi, Phi_inv, bvn_cdf, chunked, mc_model_cell_measure,
                               mc_model_interface_area, model_area_table, model_cell_measure,
                               model_cell_measures, model_interface_area, orthant_probability, phi, rng_stream)

PHI0 = 1.0 / math.sqrt(2.0 * math.pi)


def bisect_quantile(p, lo=-10.0, hi=10.0):
    """Quantile by bisection on the erf-based cdf (independent of scipy)."""
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if 0.5 * (1.0 + math.erf(mid / math.sqrt(2.0))) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_quantile_against_bisection():
    assert Phi_inv(0.4) == pytest.approx(-0.2533471, abs=1e-7)
    for p in (1e-6, 0.01, 0.25, 0.4, 0.5, 0.9, 0.999):
        assert Phi_inv(p) == pytest.approx(bisect_quantile(p), abs=1e-12)
        assert Phi(Phi_inv(p)) == pytest.approx(p, rel=1e-13)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
def test_quantile_domain(p):
    with pytest.raises(DomainError):
        Phi_inv(p)


def test_density_values():
    assert phi(0.0) == pytest.approx(0.3989422804014327, abs=1e-16)
    assert phi(1.0) == pytest.approx(PHI0 * math.exp(-0.5), abs=1e-16)


def test_bvn_against_scipy_and_closed_form():
    rng = np.random.default_rng(3)
    for _ in range(50):
        h, k = rng.normal(size=2) * 1.5
        rho = rng.uniform(-0.95, 0.95)
        ref = multivariate_normal([0, 0], [[1, rho], [rho, 1]]).cdf([h, k])
        assert float(bvn_cdf(h, k, rho)) == pytest.approx(ref, abs=1e-6)
    for rho in (-0.9, -0.3, 0.0, 0.5, 0.99):
        assert float(bvn_cdf(0.0, 0.0, rho)) == pytest.approx(0.25 + math.asin(rho) / (2 * math.pi), abs=1e-14)
    assert float(bvn_cdf(0.3, -0.2, 1.0)) == pytest.approx(Phi(-0.2), abs=1e-15)


def test_orthant_closed_forms():
    # Sheppard's formula in three dimensions, zero mean.
    rng = np.random.default_rng(4)
    for _ in range(10):
        M = rng.normal(size=(3, 3))
        C = M @ M.T + 0.3 * np.eye(3)
        d = np.sqrt(np.diag(C))
        R = C / np.outer(d, d)
        ref = 1 / 8 + (math.asin(R[0, 1]) + math.asin(R[0, 2]) + math.asin(R[1, 2])) / (4 * math.pi)
        assert orthant_probability(np.zeros(3), C) == pytest.approx(ref, abs=1e-10)
    # Equicorrelation 1/2: P(X_0 >= X_1..X_d) = 1/(d+1).
    for d in (1, 2, 3, 4):
        C = 0.5 * (np.eye(d) + np.ones((d, d)))
        assert orthant_probability(np.zeros(d), C) == pytest.approx(1 / (d + 1), abs=1e-10)


def test_orthant_against_sampling():
    rng = np.random.default_rng(5)
    M = rng.normal(size=(4, 4))
    C = M @ M.T + 0.5 * np.eye(4)
    mean = rng.normal(size=4) * 0.5
    W = rng.multivariate_normal(mean, C, size=400_000)
    hits = np.all(W <= 0, axis=1).mean()
    se = math.sqrt(hits * (1 - hits) / W.shape[0])
    assert abs(orthant_probability(mean, C) - hits) <= 4 * se


def test_orthant_degenerate_coordinate():
    C = np.diag([1.0, 0.0])
    assert orthant_probability([0.0, -1.0], C) == pytest.approx(0.5)
    assert orthant_probability([0.0, 1.0], C) == 0.0


def test_two_cell_closed_forms():
    for d in (-1.3, 0.0, 0.4, 2.0):
        x = np.array([d / 2, -d / 2])
        assert model_cell_measure(x, 0) == pytest.approx(Phi((x[1] - x[0]) / math.sqrt(2)), abs=1e-11)
        assert model_interface_area(x, 0, 1) == pytest.approx(phi(abs(d) / math.sqrt(2)), abs=1e-15)


def test_barycenter_measures_and_areas():
    for q in (2, 3, 4, 5):
        np.testing.assert_allclose(model_cell_measures(np.zeros(q)), 1.0 / q, atol=1e-11)
    assert model_interface_area(np.zeros(3), 0, 1) == pytest.approx(PHI0 / 2, abs=1e-11)
    a4 = PHI0 * (0.25 + math.asin(1 / 3) / (2 * math.pi))
    assert model_interface_area(np.zeros(4), 1, 3) == pytest.approx(a4, abs=1e-11)


def test_measures_sum_and_area_symmetry():
    rng = np.random.default_rng(6)
    for q in (3, 4, 5):
        x = rng.normal(size=q)
        x -= x.mean()
        assert model_cell_measures(x).sum() == pytest.approx(1.0, abs=1e-10)
        A = model_area_table(x)
        np.testing.assert_array_equal(A, A.T)
        assert np.all(np.diag(A) == 0)
        assert model_interface_area(x, 2, 0) == A[0, 2]


def test_cell_measure_against_orthant():
    rng = np.random.default_rng(7)
    x = rng.normal(size=4)
    x -= x.mean()
    for i in range(4):
        # cell i: G_k - G_i <= x_k - x_i for k != i
        idx = [k for k in range(4) if k != i]
        C = np.ones((3, 3)) + np.eye(3)
        assert model_cell_measure(x, i) == pytest.approx(orthant_probability(-(x[idx] - x[i]), C), abs=1e-10)


def test_mc_cross_checks():
    x = np.array([0.3, -0.1, -0.2])
    spec = McSpec(400_000, 11)
    est = mc_model_cell_measure(x, 1, spec)
    assert abs(est.value - model_cell_measure(x, 1)) <= 4 * est.stderr
    est = mc_model_interface_area(x, 0, 2, spec)
    assert abs(est.value - model_interface_area(x, 0, 2)) <= 4 * est.stderr


def test_mc_reproducible_and_keyed():
    x = np.array([0.2, 0.0, -0.2])
    a = mc_model_cell_measure(x, 0, McSpec(50_000, 9))
    assert a == mc_model_cell_measure(x, 0, McSpec(50_000, 9))
    assert a != mc_model_cell_measure(x, 0, McSpec(50_000, 10))
    g1 = rng_stream(1, 0, 5).standard_normal(4)
    np.testing.assert_array_equal(g1, rng_stream(1, 0, 5).standard_normal(4))
    assert not np.array_equal(g1, rng_stream(1, 0, 6).standard_normal(4))


def test_chunking_covers_total():
    assert sum(chunked(1_000_001, 1 << 17)) == 1_000_001
    assert list(chunked(5, 2)) == [2, 2, 1]


def test_index_validation():
    with pytest.raises(InvalidDimensionError):
        model_cell_measure(np.zeros(3), 3)
    with pytest.raises(ValueError):
        model_interface_area(np.zeros(3), 1, 1)
    with pytest.raises(DomainError):
        model_cell_measure(np.array([1.0, 0.0]), 0)


@pytest.mark.parametrize("r", [0.999, 0.99999, -0.9999, 1.0])
def test_orthant_near_singular_correlation(r):
    # Sheppard's formula again, with two coordinates nearly (or exactly) collinear.
    R = np.array([[1.0, 0.3, 0.3 * r], [0.3, 1.0, r], [0.3 * r, r, 1.0]])
    R[0, 2] = R[2, 0] = 0.3 * r + math.sqrt(max(0.0, 1 - r * r)) * 0.5 * math.sqrt(1 - 0.09)
    ref = 1 / 8 + (math.asin(R[0, 1]) + math.asin(R[0, 2]) + math.asin(R[1, 2])) / (4 * math.pi)
    assert orthant_probability(np.zeros(3), R) == pytest.approx(ref, abs=1e-10)
