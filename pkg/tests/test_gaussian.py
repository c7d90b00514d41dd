import math

import numpy as np
import pytest
from scipy import integrate

from pigmm.errors import DimensionError, SingularCovarianceError
from pigmm.gaussian import GaussianComponent, gaussian_logpdf, regularize_covariance

from conftest import random_spd


def comp(mean, cov):
    return GaussianComponent.from_covariance(mean, cov)


def test_identity_at_mean(backend):
    assert gaussian_logpdf([0.0, 0.0], comp([0, 0], np.eye(2))) == pytest.approx(-math.log(2 * math.pi), abs=1e-12)
    assert gaussian_logpdf([0.0, 0.0], comp([0, 0], np.eye(2))) == pytest.approx(-1.837877, abs=1e-6)


def test_standard_normal_mode(backend):
    assert gaussian_logpdf([0.0], comp([0.0], [[1.0]])) == pytest.approx(-0.918939, abs=1e-6)


def test_diagonal_closed_form(backend):
    oracle = -0.5 * (2 * math.log(2 * math.pi) + math.log(36) + (4 / 4 + 9 / 9))
    value = gaussian_logpdf([2.0, 3.0], comp([0, 0], np.diag([4.0, 9.0])))
    assert value == pytest.approx(oracle, abs=1e-12)
    assert value == pytest.approx(-4.62964, abs=1e-5)


def test_dimension_mismatch_names_both():
    with pytest.raises(DimensionError, match="expected d=2") as exc:
        gaussian_logpdf([1.0, 2.0, 3.0], comp([0, 0], np.eye(2)))
    assert "3" in str(exc.value)


def test_cached_invariants(rng):
    S = random_spd(rng, 4)
    c = comp(rng.normal(size=4), S)
    assert np.array_equal(c.covariance, c.covariance.T)
    assert np.all(np.diag(c.chol_lower) > 0)
    assert c.log_det == pytest.approx(2 * np.log(np.diag(c.chol_lower)).sum(), rel=1e-12)
    assert c.log_det == pytest.approx(np.linalg.slogdet(S)[1], rel=1e-10)
    with pytest.raises(ValueError):
        c.mean[0] = 1.0


@pytest.mark.parametrize("d", [2, 3])
def test_quadratic_form_matches_explicit_inverse(backend, d):
    rng = np.random.default_rng(d)
    for _ in range(50):
        S = random_spd(rng, d)
        mu = rng.normal(size=d)
        x = rng.normal(size=d) * 2
        diff = x - mu
        oracle = -0.5 * (d * math.log(2 * math.pi) + math.log(np.linalg.det(S))
                         + diff @ np.linalg.inv(S) @ diff)
        assert gaussian_logpdf(x, comp(mu, S)) == pytest.approx(oracle, rel=1e-10)


def test_density_integrates_to_one_1d(rng):
    s2 = float(random_spd(rng, 1)[0, 0])
    c = comp([0.3], [[s2]])
    total, _ = integrate.quad(lambda t: math.exp(gaussian_logpdf([t], c)), -60, 60, limit=200)
    assert total == pytest.approx(1.0, abs=1e-3)


def test_density_integrates_to_one_2d(rng):
    S = random_spd(rng, 2)
    c = comp([0.0, 0.0], S)
    half = 8 * math.sqrt(S.diagonal().max())
    g = np.linspace(-half, half, 801)
    gx, gy = np.meshgrid(g, g)
    dens = np.exp(c.logpdf(np.column_stack([gx.ravel(), gy.ravel()]))).reshape(gx.shape)
    total = integrate.trapezoid(integrate.trapezoid(dens, g, axis=1), g)
    assert total == pytest.approx(1.0, abs=1e-3)


def test_mean_is_the_mode(rng):
    S = random_spd(rng, 3)
    mu = rng.normal(size=3)
    c = comp(mu, S)
    peak = gaussian_logpdf(mu, c)
    for delta in rng.normal(size=(100, 3)):
        assert peak >= gaussian_logpdf(mu + delta, c)


def test_far_tail_is_finite(backend):
    c = comp([0.0, 0.0], np.eye(2))
    v = gaussian_logpdf([100.0, 100.0], c)  # quadratic form 2e4
    assert np.isfinite(v) and v < -9000


def test_regularize_identity_unchanged():
    M, L, ridge = regularize_covariance(np.eye(2), 0.0)
    assert np.array_equal(M, np.eye(2)) and ridge == 0.0


def test_regularize_pure_ridge():
    M, _, _ = regularize_covariance(np.zeros((2, 2)), 1e-6)
    np.testing.assert_array_equal(M, 1e-6 * np.eye(2))


def test_regularize_rank_one():
    M, L, ridge = regularize_covariance([[1.0, 1.0], [1.0, 1.0]], 1e-6)
    np.testing.assert_array_equal(M, [[1 + 1e-6, 1], [1, 1 + 1e-6]])
    # leading minors: 1 + 1e-6 > 0 and (1 + 1e-6)^2 - 1 > 0
    assert M[0, 0] > 0 and M[0, 0] * M[1, 1] - M[0, 1] ** 2 > 0
    assert ridge == 1e-6 and np.all(np.diag(L) > 0)


def test_regularize_symmetrizes():
    S = np.array([[2.0, 0.5 + 1e-16], [0.5, 1.0]])
    M, _, _ = regularize_covariance(S, 0.0)
    assert M[0, 1] == M[1, 0]


def test_regularize_doubles_ridge_until_pd():
    S = np.array([[1.0, 0.0], [0.0, -1e-3]])
    M, L, ridge = regularize_covariance(S, 1e-6)
    assert ridge > 1e-3 and np.all(np.diag(L) > 0)
    assert ridge / 1e-6 == 2 ** round(math.log2(ridge / 1e-6))


def test_regularize_gives_up_with_component_name():
    S = np.array([[1.0, 0.0], [0.0, -1e6]])
    with pytest.raises(SingularCovarianceError, match="component 3"):
        regularize_covariance(S, 1e-6, max_attempts=5, name=3)
