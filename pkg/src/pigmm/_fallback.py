"""NumPy implementations of the kernels in ``_kernels.pyx``."""
import numpy as np
from scipy.linalg import solve_triangular

LOG_2PI = 1.8378770664093453


def component_logpdf(X, mean, chol, log_det):
    d = X.shape[1]
    z = solve_triangular(chol, (X - mean).T, lower=True, check_finite=False)
    maha = np.einsum("ij,ij->j", z, z)
    return -0.5 * (d * LOG_2PI + log_det + maha)


def logsumexp_rows(A):
    mx = A.max(axis=1)
    finite = np.isfinite(mx)
    shift = np.where(finite, mx, 0.0)
    with np.errstate(divide="ignore"):
        out = shift + np.log(np.exp(A - shift[:, None]).sum(axis=1))
    out[~finite] = -np.inf
    return out


def normalize_log_rows(A):
    lse = logsumexp_rows(A)
    return np.exp(A - lse[:, None]), lse
