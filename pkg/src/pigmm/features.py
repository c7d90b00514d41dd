"""Physics-informed feature pipeline: the P / (C_p V) energy proxy, then z-scoring."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from pigmm.errors import (
    InvalidPhysicsInputError,
    PipelineError,
    SchemaError,
    UnusableDataError,
)

log = logging.getLogger(__name__)


def energy_feature(P, V, C_p, row=None):
    """Normalized "energy" proxy P / (C_p * V).

    Not an energy in the physical sense; it tracks how much laser power is
    delivered per unit of scan speed and heat capacity.
    """
    where = f"row {row}: " if row is not None else ""
    if not C_p > 0:
        raise InvalidPhysicsInputError(f"{where}specific heat must be > 0, got {C_p}")
    if not V > 0:
        raise InvalidPhysicsInputError(f"{where}scan speed must be > 0, got {V}")
    return P / (C_p * V)


def energy_column(P, V, C_p):
    """Vectorized :func:`energy_feature`; errors name the first offending row."""
    P = np.asarray(P, dtype=np.float64)
    V = np.asarray(V, dtype=np.float64)
    C_p = np.broadcast_to(np.asarray(C_p, dtype=np.float64), P.shape)
    bad = np.flatnonzero(~(V > 0) | ~(C_p > 0))
    if bad.size:
        i = int(bad[0])
        energy_feature(P[i], V[i], C_p[i], row=i)
    return P / (C_p * V)


@dataclass(frozen=True)
class EnergyFeatureConfig:
    """Where to find P, V and C_p. ``specific_heat`` is a scalar or a column name."""

    power_column: str
    speed_column: str
    specific_heat: float | str
    output_column: str = "energy"
    replace_inputs: bool = False

    def __post_init__(self):
        if self.power_column == self.speed_column:
            raise SchemaError("power and speed columns must differ")
        if not isinstance(self.specific_heat, str) and not self.specific_heat > 0:
            raise InvalidPhysicsInputError(
                f"specific heat must be > 0, got {self.specific_heat}"
            )

    def to_dict(self):
        return {
            "power_column": self.power_column,
            "speed_column": self.speed_column,
            "specific_heat": self.specific_heat,
            "output_column": self.output_column,
            "replace_inputs": self.replace_inputs,
        }


class TransformedFeatures(np.ndarray):
    """Marker type for pipeline output, so it cannot be fed back in as raw input."""


@dataclass(frozen=True)
class FeaturePipeline:
    input_columns: tuple
    energy: EnergyFeatureConfig | None = None
    standardize: bool = True
    columns: tuple = ()
    column_means: tuple = ()
    column_stds: tuple = ()
    dropped_columns: tuple = ()
    fitted_on: int = 0

    @property
    def dim(self):
        return len(self.columns)

    def _with_energy(self, X):
        cols = list(self.input_columns)
        if self.energy is None:
            return X, cols
        e = self.energy
        for c in (e.power_column, e.speed_column):
            if c not in cols:
                raise SchemaError(f"energy input column {c!r} not in schema {cols}")
        if isinstance(e.specific_heat, str):
            if e.specific_heat not in cols:
                raise SchemaError(f"specific heat column {e.specific_heat!r} not in schema")
            cp = X[:, cols.index(e.specific_heat)]
        else:
            cp = e.specific_heat
        energy = energy_column(X[:, cols.index(e.power_column)], X[:, cols.index(e.speed_column)], cp)
        if e.replace_inputs:
            keep = [i for i, c in enumerate(cols) if c not in (e.power_column, e.speed_column)]
            X = X[:, keep]
            cols = [cols[i] for i in keep]
        return np.column_stack([X, energy]), cols + [e.output_column]

    def _raw_matrix(self, x):
        if isinstance(x, TransformedFeatures):
            raise PipelineError("input was already transformed; pass raw rows only")
        if isinstance(x, dict):
            missing = [c for c in self.input_columns if c not in x]
            if missing:
                raise SchemaError(f"row is missing columns {missing}")
            x = [x[c] for c in self.input_columns]
        X = np.asarray(x, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != len(self.input_columns):
            raise SchemaError(
                f"expected {len(self.input_columns)} raw columns {list(self.input_columns)}, "
                f"got {X.shape[1]}"
            )
        return X

    def transform(self, x):
        """Energy column first, then (value - mean) / std on every retained column."""
        X = self._raw_matrix(x)
        X, cols = self._with_energy(X)
        if self.standardize:
            keep = [cols.index(c) for c in self.columns]
            X = (X[:, keep] - np.asarray(self.column_means)) / np.asarray(self.column_stds)
        return X.view(TransformedFeatures)

    def inverse_transform(self, Z):
        """Undo standardization. Only defined when no energy column was added."""
        if self.energy is not None:
            raise PipelineError("inverse transform is defined for standardize-only pipelines")
        if self.dropped_columns:
            raise PipelineError(f"columns {list(self.dropped_columns)} were dropped")
        Z = np.asarray(Z, dtype=np.float64)
        if not self.standardize:
            return Z.copy()
        return Z * np.asarray(self.column_stds) + np.asarray(self.column_means)

    def to_dict(self):
        return {
            "input_columns": list(self.input_columns),
            "energy": None if self.energy is None else self.energy.to_dict(),
            "standardize": self.standardize,
            "columns": list(self.columns),
            "column_means": list(self.column_means),
            "column_stds": list(self.column_stds),
            "dropped_columns": list(self.dropped_columns),
            "fitted_on": self.fitted_on,
        }

    @classmethod
    def from_dict(cls, d):
        energy = None if d["energy"] is None else EnergyFeatureConfig(**d["energy"])
        return cls(
            input_columns=tuple(d["input_columns"]),
            energy=energy,
            standardize=bool(d["standardize"]),
            columns=tuple(d["columns"]),
            column_means=tuple(float(v) for v in d["column_means"]),
            column_stds=tuple(float(v) for v in d["column_stds"]),
            dropped_columns=tuple(d["dropped_columns"]),
            fitted_on=int(d["fitted_on"]),
        )


def fit_pipeline(rows, columns, energy=None, standardize=True):
    """Fit standardization statistics on training rows.

    Standard deviations use the population form (divisor n). Zero-variance
    columns are dropped and listed in ``dropped_columns``.
    """
    X = np.asarray(rows, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise UnusableDataError("fitting a pipeline needs at least 2 rows")
    columns = tuple(columns)
    base = FeaturePipeline(input_columns=columns, energy=energy, standardize=False)
    Xe, cols = base._with_energy(base._raw_matrix(X))
    if not standardize:
        return FeaturePipeline(columns, energy, False, tuple(cols), fitted_on=X.shape[0])
    means = Xe.mean(axis=0)
    stds = Xe.std(axis=0)
    # constant columns can show ulp-level spread after the mean is rounded
    keep = [i for i in range(len(cols)) if stds[i] > 1e-12 * abs(means[i]) and stds[i] > 0]
    dropped = tuple(c for i, c in enumerate(cols) if i not in keep)
    if dropped:
        log.warning("dropping zero-variance columns: %s", ", ".join(dropped))
    if not keep:
        raise UnusableDataError("every feature column has zero variance")
    return FeaturePipeline(
        input_columns=columns,
        energy=energy,
        standardize=True,
        columns=tuple(cols[i] for i in keep),
        column_means=tuple(float(means[i]) for i in keep),
        column_stds=tuple(float(stds[i]) for i in keep),
        dropped_columns=dropped,
        fitted_on=X.shape[0],
    )


def apply_pipeline(x, pipeline):
    return pipeline.transform(x)


def ks_to_fitted_gaussian(values):
    """Kolmogorov-Smirnov distance between a sample and N(mean, sd) fitted to it.

    Uses the sample standard deviation (ddof=1).
    """
    x = np.sort(np.asarray(values, dtype=np.float64).reshape(-1))
    n = x.size
    sd = x.std(ddof=1) if n > 1 else 0.0
    if not sd > 0:
        raise UnusableDataError("series has zero standard deviation")
    cdf = ndtr((x - x.mean()) / sd)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n)))


def unimodality_gain(raw_values, transformed_values):
    """KS-to-fitted-Gaussian for a raw column and its surrogate replacement.

    A smaller second value means the surrogate is closer to a single bell curve.
    """
    raw = np.asarray(raw_values, dtype=np.float64).reshape(-1)
    new = np.asarray(transformed_values, dtype=np.float64).reshape(-1)
    if raw.size < 20 or new.size < 20:
        raise UnusableDataError("unimodality diagnostic needs at least 20 values per series")
    return ks_to_fitted_gaussian(raw), ks_to_fitted_gaussian(new)
