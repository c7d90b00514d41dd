"""Multivariate Gaussian components evaluated through a cached Cholesky factor."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from pigmm import kernels
from pigmm.errors import DimensionError, SingularCovarianceError

DEFAULT_RIDGE = 1e-6
MAX_RIDGE_ATTEMPTS = 20


def _frozen(a):
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


def symmetrize(S):
    S = np.asarray(S, dtype=np.float64)
    return 0.5 * (S + S.T)


def regularize_covariance(S, ridge=DEFAULT_RIDGE, max_attempts=MAX_RIDGE_ATTEMPTS, name=None):
    """Symmetrize ``S`` and add ``ridge * I`` until it admits a Cholesky factor.

    The ridge doubles after each failed factorization. A zero ridge that fails
    restarts from a tiny ridge scaled to the diagonal.

    Returns ``(matrix, chol_lower, ridge_used)``.
    """
    S = symmetrize(S)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DimensionError(S.shape[0], S.shape, what="covariance")
    if ridge < 0:
        raise ValueError("ridge must be non-negative")
    d = S.shape[0]
    eye = np.eye(d)
    scale = max(float(np.mean(np.abs(np.diag(S)))), 1.0)
    for _ in range(max_attempts):
        candidate = S + ridge * eye if ridge > 0 else S.copy()
        if np.all(np.isfinite(candidate)):
            try:
                L = np.linalg.cholesky(candidate)
            except np.linalg.LinAlgError:
                pass
            else:
                if np.all(np.diag(L) > 0):
                    return candidate, L, float(ridge)
        ridge = 2.0 * ridge if ridge > 0 else 1e-12 * scale
    label = f" for component {name}" if name is not None else ""
    raise SingularCovarianceError(
        f"covariance{label} is not positive definite after {max_attempts} ridge attempts "
        f"(last ridge {ridge / 2.0:.3g})"
    )


@dataclass(frozen=True)
class GaussianComponent:
    """One Gaussian with its lower Cholesky factor and log-determinant cached.

    Build with :meth:`from_covariance`; the constructor trusts its arguments.
    """

    mean: np.ndarray
    covariance: np.ndarray
    chol_lower: np.ndarray
    log_det: float
    ridge: float = field(default=0.0, compare=False)

    @classmethod
    def from_covariance(cls, mean, covariance, ridge=0.0, name=None):
        mean = np.asarray(mean, dtype=np.float64).reshape(-1)
        covariance = np.atleast_2d(np.asarray(covariance, dtype=np.float64))
        if covariance.shape != (mean.size, mean.size):
            raise DimensionError(mean.size, covariance.shape[0], what="covariance")
        cov, L, used = regularize_covariance(covariance, ridge, name=name)
        return cls.from_factor(mean, cov, L, used)

    @classmethod
    def from_factor(cls, mean, covariance, chol_lower, ridge=0.0):
        L = np.asarray(chol_lower, dtype=np.float64)
        log_det = 2.0 * float(np.sum(np.log(np.diag(L))))
        return cls(_frozen(mean), _frozen(covariance), _frozen(L), log_det, ridge)

    @property
    def dim(self):
        return self.mean.size

    def logpdf(self, X):
        """Log-density of each row of an (n, d) array."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.dim:
            raise DimensionError(self.dim, X.shape[1])
        return kernels.component_logpdf(X, self.mean, self.chol_lower, self.log_det)


def gaussian_logpdf(x, component):
    """log N(x; mu, Sigma) for a single point ``x``.

    The quadratic form is solved against the Cholesky factor by forward
    substitution; the covariance is never inverted.
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.size != component.dim:
        raise DimensionError(component.dim, x.size)
    return float(component.logpdf(x[None, :])[0])
