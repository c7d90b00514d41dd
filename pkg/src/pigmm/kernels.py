"""Dispatch for the hot numerical kernels.

The compiled Cython module is used when it imported successfully; otherwise the
NumPy fallback is selected. ``use_backend`` switches explicitly, which the tests
and the benchmark use to compare both paths.
"""
import numpy as np

from pigmm import _fallback

try:
    from pigmm import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _fallback}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled

_active = _compiled if _compiled is not None else _fallback


def available_backends():
    return sorted(_BACKENDS)


def current_backend():
    return "compiled" if _active is _compiled and _compiled is not None else "python"


def use_backend(name):
    """Select ``"compiled"`` or ``"python"``; returns the previous backend name."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available; have {available_backends()}")
    previous = current_backend()
    _active = _BACKENDS[name]
    return previous


def _c2d(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def component_logpdf(X, mean, chol, log_det):
    """Log N(x_i; mean, chol chol^T) for every row x_i of the (n, d) array ``X``."""
    return _active.component_logpdf(_c2d(X), _c2d(mean), _c2d(chol), float(log_det))


def logsumexp_rows(A):
    return _active.logsumexp_rows(_c2d(A))


def normalize_log_rows(A):
    """Softmax each row of a log-weight matrix; returns (probabilities, row log-sum-exp)."""
    return _active.normalize_log_rows(_c2d(A))
