"""Gaussian mixture models fitted by expectation-maximization."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from pigmm import kernels
from pigmm.errors import (
    DegenerateFitError,
    DimensionError,
    InsufficientDataError,
    InvalidParameterError,
    SingularCovarianceError,
)
from pigmm.gaussian import DEFAULT_RIDGE, GaussianComponent
from pigmm.rng import fit_rng

COVARIANCE_KINDS = ("full", "diag")
MAX_LLOYD_ITER = 20


@dataclass(frozen=True)
class EmConfig:
    seed: int = 0
    max_iter: int = 500
    rel_tol: float = 1e-6
    ridge: float = DEFAULT_RIDGE
    covariance_kind: str = "full"
    n_restarts: int = 4
    max_collapses: int = 3

    def __post_init__(self):
        if self.covariance_kind not in COVARIANCE_KINDS:
            raise InvalidParameterError(
                f"covariance_kind must be one of {COVARIANCE_KINDS}, got {self.covariance_kind!r}"
            )
        if self.max_iter < 1 or self.n_restarts < 1:
            raise InvalidParameterError("max_iter and n_restarts must be >= 1")


@dataclass(frozen=True)
class FitReport:
    n_iterations: int
    final_avg_loglik: float
    loglik_trace: tuple
    converged: bool
    seed: int
    ridge_used: float
    restart: int = 0
    n_reinitializations: int = 0
    n_pruned: int = 0

    def to_dict(self):
        return {
            "n_iterations": self.n_iterations,
            "final_avg_loglik": self.final_avg_loglik,
            "loglik_trace": list(self.loglik_trace),
            "converged": self.converged,
            "seed": self.seed,
            "ridge_used": self.ridge_used,
            "restart": self.restart,
            "n_reinitializations": self.n_reinitializations,
            "n_pruned": self.n_pruned,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["loglik_trace"] = tuple(d["loglik_trace"])
        return cls(**d)


@dataclass(frozen=True)
class MixtureModel:
    """Weighted sum of Gaussian components; ``weights`` are the mixing proportions."""

    weights: np.ndarray
    components: tuple
    covariance_kind: str = "full"
    fit_info: FitReport | None = field(default=None, compare=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64, copy=True).reshape(-1)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "components", tuple(self.components))
        if len(self.components) < 1 or w.size != len(self.components):
            raise ValueError("need one weight per component and at least one component")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights must be non-negative and sum to 1, got {w}")
        dims = {c.dim for c in self.components}
        if len(dims) != 1:
            raise DimensionError(min(dims), max(dims), what="component")

    @property
    def n_components(self):
        return len(self.components)

    @property
    def dim(self):
        return self.components[0].dim

    def component_logpdfs(self, X):
        """(n, M) matrix of log(alpha_m) + log phi(x_i; mu_m, Sigma_m); zero weights give -inf."""
        X = _as_data(X, self.dim)
        out = np.full((X.shape[0], self.n_components), -np.inf)
        for m, (w, comp) in enumerate(zip(self.weights, self.components)):
            if w > 0:
                out[:, m] = math.log(w) + comp.logpdf(X)
        return out

    def log_density(self, X):
        """log Phi(x_i) for each row of ``X``."""
        return kernels.logsumexp_rows(self.component_logpdfs(X))


def _as_data(X, d=None):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None] if d is None or d == 1 else X[None, :]
    if X.ndim != 2:
        raise DimensionError(d, X.shape, what="data")
    if d is not None and X.shape[1] != d:
        raise DimensionError(d, X.shape[1])
    return X


def mixture_logdensity(x, model):
    """log of sum_m alpha_m phi(x; mu_m, Sigma_m) for one point, via log-sum-exp."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.size != model.dim:
        raise DimensionError(model.dim, x.size)
    return float(model.log_density(x[None, :])[0])


def e_step(data, model):
    """Responsibilities (n, M) and the mean per-sample log-likelihood."""
    X = _as_data(data, model.dim)
    if X.shape[0] < 1:
        raise InsufficientDataError("e_step needs at least one row")
    resp, lse = kernels.normalize_log_rows(model.component_logpdfs(X))
    return resp, float(np.mean(lse))


def _scatter(X, w, mean, kind):
    diff = X - mean
    S = (diff * w[:, None]).T @ diff / w.sum()
    if kind == "diag":
        S = np.diag(np.diag(S))
    return S


def m_step(data, responsibilities, covariance_kind="full", ridge=DEFAULT_RIDGE):
    """Closed-form parameter update from soft assignments.

    Returns a :class:`MixtureModel` whose covariances are the weighted MLE
    scatter plus ``ridge * I``. A component with zero total responsibility keeps
    a zero weight and the pooled data covariance.
    """
    X = _as_data(data)
    R = np.asarray(responsibilities, dtype=np.float64)
    n, d = X.shape
    if R.ndim != 2 or R.shape[0] != n:
        raise DimensionError(n, R.shape[0], what="responsibilities")
    mass = R.sum(axis=0)
    weights = mass / n
    weights = weights / weights.sum()
    comps = []
    for m in range(R.shape[1]):
        if mass[m] > 0:
            w = R[:, m]
            mean = (X * w[:, None]).sum(axis=0) / mass[m]
            cov = _scatter(X, w, mean, covariance_kind)
        else:
            mean = X.mean(axis=0)
            cov = _scatter(X, np.ones(n), mean, covariance_kind)
        comps.append(GaussianComponent.from_covariance(mean, cov, ridge, name=m))
    return MixtureModel(weights, comps, covariance_kind)


def _sq_dist(X, centers):
    return ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)


def kmeanspp_init(data, M, seed):
    """k-means++ seeding followed by at most 20 Lloyd iterations.

    ``seed`` is an int or a ``numpy.random.Generator``. Returns
    ``(centers, assignments)``.
    """
    X = _as_data(data)
    n = X.shape[0]
    if M < 1 or n < M:
        raise InsufficientDataError(f"k-means++ needs n >= M >= 1, got n={n}, M={M}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    chosen = [int(rng.integers(n))]
    d2 = _sq_dist(X, X[chosen]).min(axis=1)
    while len(chosen) < M:
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            # every point coincides with a center; pick any unused index
            unused = np.setdiff1d(np.arange(n), chosen)
            idx = int(rng.choice(unused))
        chosen.append(idx)
        d2 = np.minimum(d2, ((X - X[idx]) ** 2).sum(axis=1))
    centers = X[chosen].copy()
    assign = np.argmin(_sq_dist(X, centers), axis=1)
    for _ in range(MAX_LLOYD_ITER):
        new_centers = centers.copy()
        for m in range(M):
            members = assign == m
            if members.any():
                new_centers[m] = X[members].mean(axis=0)
        new_assign = np.argmin(_sq_dist(X, new_centers), axis=1)
        centers = new_centers
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
    return centers, assign


def _pooled_covariance(X, kind):
    return _scatter(X, np.ones(X.shape[0]), X.mean(axis=0), kind)


def init_from_assignments(data, assignments, M, covariance_kind="full", ridge=DEFAULT_RIDGE):
    """Initial mixture from hard cluster labels.

    Clusters with fewer than d + 1 members get the pooled covariance, since
    their own scatter is rank deficient.
    """
    X = _as_data(data)
    n, d = X.shape
    pooled = _pooled_covariance(X, covariance_kind)
    weights, comps = [], []
    for m in range(M):
        members = X[assignments == m]
        if len(members) == 0:
            continue
        mean = members.mean(axis=0)
        if len(members) >= d + 1:
            cov = _scatter(members, np.ones(len(members)), mean, covariance_kind)
        else:
            cov = pooled
        weights.append(len(members) / n)
        comps.append(GaussianComponent.from_covariance(mean, cov, ridge, name=m))
    weights = np.asarray(weights)
    return MixtureModel(weights / weights.sum(), comps, covariance_kind)


def _reinitialize(X, model, m, ridge):
    """Move component ``m`` onto the worst-explained sample and renormalize weights."""
    M = model.n_components
    worst = int(np.argmin(model.log_density(X)))
    comps = list(model.components)
    comps[m] = GaussianComponent.from_covariance(
        X[worst], _pooled_covariance(X, model.covariance_kind), ridge, name=m
    )
    w = model.weights.copy()
    others = np.delete(w, m).sum()
    w = w * ((1.0 - 1.0 / M) / others)
    w[m] = 1.0 / M
    return MixtureModel(w / w.sum(), comps, model.covariance_kind)


def _prune(model, m):
    comps = [c for i, c in enumerate(model.components) if i != m]
    w = np.delete(model.weights, m)
    return MixtureModel(w / w.sum(), comps, model.covariance_kind)


def _run_em(X, M, config, rng, restart):
    n, d = X.shape
    mass_floor = d + 1
    _, assign = kmeanspp_init(X, M, rng)
    model = init_from_assignments(X, assign, M, config.covariance_kind, config.ridge)
    collapses = [0] * model.n_components
    n_reinit = n_pruned = 0

    resp, ll = e_step(X, model)
    trace = [ll]
    converged = False
    it = 0
    while it < config.max_iter:
        mass = resp.sum(axis=0)
        low = [m for m in range(model.n_components) if mass[m] < mass_floor]
        if low and model.n_components > 1:
            m = low[0]
            collapses[m] += 1
            if collapses[m] >= config.max_collapses:
                model = _prune(model, m)
                del collapses[m]
                n_pruned += 1
            else:
                model = _reinitialize(X, model, m, config.ridge)
                n_reinit += 1
            # a structural change breaks the monotone sequence; restart the trace
            resp, ll = e_step(X, model)
            trace = [ll]
            continue
        it += 1
        model = m_step(X, resp, config.covariance_kind, config.ridge)
        resp, new_ll = e_step(X, model)
        if not np.isfinite(new_ll):
            raise DegenerateFitError("log-likelihood became non-finite")
        trace.append(new_ll)
        improvement = new_ll - ll
        ll = new_ll
        if improvement < config.rel_tol * max(abs(trace[-2]), 1.0):
            converged = True
            break

    ridge_used = max(c.ridge for c in model.components)
    report = FitReport(
        n_iterations=it,
        final_avg_loglik=ll,
        loglik_trace=tuple(trace),
        converged=converged,
        seed=config.seed,
        ridge_used=ridge_used,
        restart=restart,
        n_reinitializations=n_reinit,
        n_pruned=n_pruned,
    )
    return replace(model, fit_info=report)


def fit_em(data, M, config=None):
    """Fit an M-component mixture by EM, keeping the best of several restarts.

    Each restart seeds from k-means++ with its own RNG stream derived from
    ``config.seed``, so results do not depend on execution order. A run stops
    when the mean log-likelihood improves by less than ``rel_tol`` relative to
    ``max(|previous|, 1)`` or after ``max_iter`` iterations.
    """
    config = config or EmConfig()
    X = _as_data(data)
    n = X.shape[0]
    if M < 1:
        raise InvalidParameterError(f"M must be >= 1, got {M}")
    if n < M:
        raise InsufficientDataError(f"need at least M={M} samples, got n={n}")
    best = None
    failures = []
    for restart, rng in enumerate(fit_rng(config.seed, config.n_restarts)):
        try:
            model = _run_em(X, M, config, rng, restart)
        except (SingularCovarianceError, DegenerateFitError) as exc:
            failures.append(str(exc))
            continue
        if best is None or model.fit_info.final_avg_loglik > best.fit_info.final_avg_loglik:
            best = model
    if best is None:
        raise DegenerateFitError(
            f"all {config.n_restarts} EM restarts collapsed: {failures[0]}"
        )
    return best


def n_parameters(M, d, covariance_kind="full"):
    """Free parameters: (M-1) weights, M*d means, and covariance terms."""
    cov_terms = M * d * (d + 1) // 2 if covariance_kind == "full" else M * d
    return (M - 1) + M * d + cov_terms


def bic(model, data):
    X = _as_data(data, model.dim)
    n = X.shape[0]
    total_ll = float(np.sum(model.log_density(X)))
    k = n_parameters(model.n_components, model.dim, model.covariance_kind)
    return -2.0 * total_ll + k * math.log(n)


def select_components(data, candidates, config=None):
    """Fit each candidate M and pick the lowest BIC (ties go to the smaller M).

    Returns ``(best_M, scores, models)`` where ``scores`` is a list of
    ``(M, bic)`` in ascending M.
    """
    config = config or EmConfig()
    X = _as_data(data)
    candidates = sorted(set(int(m) for m in candidates))
    if not candidates:
        raise InvalidParameterError("candidate list for component selection is empty")
    if candidates[-1] > X.shape[0]:
        raise InsufficientDataError(
            f"candidate M={candidates[-1]} exceeds sample count n={X.shape[0]}"
        )
    scores, models = [], {}
    for M in candidates:
        model = fit_em(X, M, config)
        scores.append((M, bic(model, X)))
        models[M] = model
    best_M = min(scores, key=lambda s: (s[1], s[0]))[0]
    return best_M, scores, models
