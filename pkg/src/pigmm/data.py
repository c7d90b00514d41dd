"""Datasets: L-PBF/DED schemas, CSV I/O, splitting, and seeded synthetic generators."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from pigmm.errors import (
    EmptyDatasetError,
    InvalidParameterError,
    LabelError,
    ParseError,
    SchemaError,
    SplitError,
)
from pigmm.rng import stream


class Label(str, Enum):
    NO_DEFECT = "no_defect"
    DEFECT = "defect"
    INCONCLUSIVE = "inconclusive"
    UNLABELED = "unlabeled"


CLASS_ORDER = (Label.NO_DEFECT.value, Label.DEFECT.value)
LABEL_VALUES = tuple(l.value for l in Label)

PRESETS = {
    "lpbf": (
        ("laser_power", "W"),
        ("scan_speed", "mm/s"),
        ("powder_size", "µm"),
        ("beam_diameter", "mm"),
        ("layer_thickness", "mm"),
        ("thermal_diffusivity", "m²/s"),
    ),
    "ded": (
        ("laser_power", "W"),
        ("scan_speed", "mm/s"),
        ("powder_flow", "rpm"),
        ("powder_gas", "lpm"),
        ("track_length", "mm"),
        ("track_height", "mm"),
    ),
}

# Handbook-typical specific heats, J/(kg K), used by the synthetic scenarios.
SPECIFIC_HEAT = {"lpbf": 500.0, "ded": 410.0}


@dataclass(frozen=True)
class SchemaPreset:
    name: str
    columns: tuple

    @classmethod
    def get(cls, name):
        if name not in PRESETS:
            raise SchemaError(f"unknown schema preset {name!r}; choose lpbf, ded or custom")
        return cls(name, PRESETS[name])


@dataclass(frozen=True)
class Dataset:
    """Numeric feature table plus one label per row. The label never enters ``rows``."""

    columns: tuple
    rows: np.ndarray
    labels: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        rows = np.array(self.rows, dtype=np.float64, copy=True)
        if rows.ndim == 1:
            rows = rows.reshape(-1, len(self.columns))
        labels = np.array([Label(l).value for l in self.labels], dtype=object)
        if rows.shape[1] != len(self.columns):
            raise SchemaError(f"{len(self.columns)} columns but rows have {rows.shape[1]} entries")
        if labels.shape[0] != rows.shape[0]:
            raise LabelError(f"{rows.shape[0]} rows but {labels.shape[0]} labels")
        if not np.all(np.isfinite(rows)):
            raise ParseError("dataset contains non-finite values")
        rows.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "columns", tuple((str(c), str(u)) for c, u in self.columns))
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "labels", labels)

    @property
    def names(self):
        return tuple(c for c, _ in self.columns)

    @property
    def n(self):
        return self.rows.shape[0]

    def column(self, name):
        try:
            return self.rows[:, self.names.index(name)]
        except ValueError:
            raise SchemaError(f"unknown column {name!r}; have {list(self.names)}") from None

    def subset(self, idx, provenance=None):
        idx = np.asarray(idx, dtype=int)
        return Dataset(self.columns, self.rows[idx], self.labels[idx],
                       provenance if provenance is not None else self.provenance)

    def select(self, names):
        idx = [self.names.index(c) if c in self.names else None for c in names]
        missing = [c for c, i in zip(names, idx) if i is None]
        if missing:
            raise SchemaError(f"unknown columns {missing}; have {list(self.names)}")
        return Dataset(tuple(self.columns[i] for i in idx), self.rows[:, idx], self.labels,
                       self.provenance)

    def label_counts(self):
        return {v: int(np.sum(self.labels == v)) for v in LABEL_VALUES if np.any(self.labels == v)}

    @property
    def trainable(self):
        return np.isin(self.labels, CLASS_ORDER)


def _parse_label(raw, mapping):
    if raw in mapping:
        return mapping[raw]
    if raw in LABEL_VALUES:
        return raw
    if raw == "":
        return Label.UNLABELED.value
    return None


def load_csv(path, schema="custom", label_column="label", label_mapping=None,
             require_labels=False):
    """Read a comma-separated file with a header row.

    Preset schemas pick their columns by header name in any order and ignore
    extra columns. ``custom`` uses every non-label column. Label strings go
    through ``label_mapping`` (canonical names pass through unchanged).
    """
    path = Path(path)
    mapping = {str(k): Label(v).value for k, v in (label_mapping or {}).items()}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyDatasetError(f"{path}: file is empty")
        header = [h.strip() for h in header]
        dupes = sorted({h for h in header if header.count(h) > 1})
        if dupes:
            raise SchemaError(f"{path}: duplicate header columns {dupes}")
        body = [r for r in reader if any(cell.strip() for cell in r)]
    if not body:
        raise EmptyDatasetError(f"{path}: no data rows")

    has_labels = label_column is not None and label_column in header
    if require_labels and not has_labels:
        raise SchemaError(f"{path}: label column {label_column!r} not found")
    if schema == "custom":
        columns = tuple((h, "") for h in header if h != label_column)
    else:
        columns = SchemaPreset.get(schema).columns
        missing = [c for c, _ in columns if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing required columns {missing}")
    col_idx = [header.index(c) for c, _ in columns]
    lab_idx = header.index(label_column) if has_labels else None

    rows = np.empty((len(body), len(columns)))
    labels, unmapped = [], set()
    for i, record in enumerate(body):
        line = i + 2
        if len(record) != len(header):
            raise ParseError(f"{path}: line {line} has {len(record)} cells, header has {len(header)}")
        for j, k in enumerate(col_idx):
            cell = record[k].strip()
            try:
                value = float(cell)
            except ValueError:
                raise ParseError(
                    f"{path}: line {line}, column {header[k]!r}: non-numeric value {cell!r}"
                ) from None
            if not math.isfinite(value):
                raise ParseError(f"{path}: line {line}, column {header[k]!r}: non-finite value")
            rows[i, j] = value
        if lab_idx is None:
            labels.append(Label.UNLABELED.value)
            continue
        raw = record[lab_idx].strip()
        lab = _parse_label(raw, mapping)
        if lab is None:
            unmapped.add(raw)
        labels.append(lab)
    if unmapped:
        raise LabelError(f"{path}: unmapped label values {sorted(unmapped)}")
    return Dataset(columns, rows, labels, provenance=str(path))


def format_float(x):
    """Shortest decimal string that round-trips to the same double."""
    return repr(float(x))


def write_csv(dataset, path, label_column="label"):
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(dataset.names) + [label_column])
        for row, lab in zip(dataset.rows, dataset.labels):
            w.writerow([format_float(v) for v in row] + [lab])


def _round_half_up(x):
    return int(math.floor(x + 0.5))


def split_indices(dataset, test_fraction, seed, stratified=True):
    """Row indices ``(train, test)``.

    Only defect/no-defect rows can train; inconclusive and unlabeled rows always
    go to the test side. The test share of trainable rows is
    ``round(test_fraction * n_trainable)``; with stratification the per-class
    quotas use largest-remainder allocation.
    """
    if not 0.0 < test_fraction < 1.0:
        raise SplitError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    rng = stream(seed, "split")
    usable = np.flatnonzero(dataset.trainable)
    held = np.flatnonzero(~dataset.trainable)
    target = _round_half_up(test_fraction * usable.size)
    test = []
    if stratified:
        groups = [np.flatnonzero(dataset.labels == c) for c in CLASS_ORDER]
        groups = [g for g in groups if g.size]
        quota = [test_fraction * g.size for g in groups]
        alloc = [int(math.floor(q)) for q in quota]
        order = sorted(range(len(groups)), key=lambda k: (-(quota[k] - alloc[k]), k))
        for k in order[: max(target - sum(alloc), 0)]:
            alloc[k] += 1
        for g, q in zip(groups, alloc):
            test.extend(rng.permutation(g)[:q].tolist())
    else:
        test = rng.permutation(usable)[:target].tolist()
    test_set = set(test)
    train = np.array([i for i in usable if i not in test_set], dtype=int)
    test = np.sort(np.concatenate([np.array(test, dtype=int), held]))
    if train.size == 0 or test.size == 0:
        raise SplitError(f"test_fraction {test_fraction} leaves an empty side")
    for c in CLASS_ORDER:
        if np.any(dataset.labels[usable] == c) and not np.any(dataset.labels[train] == c):
            raise SplitError(f"class {c!r} has no training rows after the split")
    return train, test


def split(dataset, test_fraction, seed, stratified=True):
    train, test = split_indices(dataset, test_fraction, seed, stratified)
    return (dataset.subset(train, f"{dataset.provenance}[train]"),
            dataset.subset(test, f"{dataset.provenance}[test]"))


SHAPES = ("unimodal", "bimodal", "flattened", "heavy_tailed")


def generalized_gaussian(rng, beta, size):
    """Symmetric generalized Gaussian with density proportional to exp(-|x|^beta).

    |X| is a power transform of a Gamma(1/beta) variate: |X| = G ** (1/beta).
    """
    g = rng.gamma(1.0 / beta, 1.0, size=size)
    sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
    return sign * g ** (1.0 / beta)


def synth_generate(shape, n, d=1, seed=0, separation=4.0, beta=4.0, dof=3.0):
    """Unlabeled samples with independent columns of the requested shape.

    ``bimodal`` places unit-variance halves at +/- separation/2; ``flattened``
    draws generalized-Gaussian values with exponent ``beta`` > 2;
    ``heavy_tailed`` draws Student-t with ``dof`` degrees of freedom.
    """
    if shape not in SHAPES:
        raise InvalidParameterError(f"unknown shape {shape!r}; choose from {SHAPES}")
    if n < 1 or d < 1:
        raise InvalidParameterError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    rng = stream(seed, "synth")
    size = (n, d)
    if shape == "unimodal":
        X = rng.standard_normal(size)
    elif shape == "bimodal":
        if separation < 0:
            raise InvalidParameterError("separation must be >= 0")
        side = np.where(rng.random(size) < 0.5, -0.5, 0.5)
        X = side * separation + rng.standard_normal(size)
    elif shape == "flattened":
        if not beta > 2:
            raise InvalidParameterError(f"flattened shape needs beta > 2, got {beta}")
        X = generalized_gaussian(rng, beta, size)
    else:
        if not dof > 0:
            raise InvalidParameterError(f"degrees of freedom must be > 0, got {dof}")
        X = rng.standard_t(dof, size)
    columns = tuple((f"x{j}", "") for j in range(d))
    return Dataset(columns, X, [Label.UNLABELED.value] * n,
                   provenance=f"synth:{shape}:n={n}:d={d}:seed={seed}")


# Log-scale displacement of the defect class along the constant-energy
# direction (P and V scaled together) at overlap=0.
_DISPLACEMENT = {"lpbf": math.log(2.0), "ded": math.log(2.0)}
_SPEED_NOISE = 0.04
_ENERGY_NOISE = 0.06


def _group_counts(scenario, n):
    if scenario == "lpbf_like":
        n_ok = _round_half_up(0.52 * n)
        return {Label.NO_DEFECT.value: n_ok, Label.DEFECT.value: n - n_ok}
    n_ok = _round_half_up(0.5 * n)
    n_inc = _round_half_up(0.1 * n)
    return {Label.NO_DEFECT.value: n_ok, Label.DEFECT.value: n - n_ok - n_inc,
            Label.INCONCLUSIVE.value: n_inc}


def synth_classification(scenario, n, seed=0, overlap=0.25):
    """Labeled process-parameter table shaped like the L-PBF or DED case study.

    Class balance is 52/48 (no-defect/defect) for ``lpbf_like`` and 50/40/10
    (no-defect/defect/inconclusive) for ``ded_like``. Power is drawn as
    ``energy * C_p * V`` with a log-normal energy shared by every class, so
    P / (C_p V) stays unimodal. Defect rows scale P and V together by
    ``exp((1 - overlap) * delta)`` (inconclusive rows by half that exponent),
    which leaves the pooled scan speed bimodal while each class stays unimodal;
    overlap=1 makes the classes identical.
    """
    if scenario not in ("lpbf_like", "ded_like"):
        raise InvalidParameterError(f"unknown scenario {scenario!r}")
    if not 0.0 <= overlap <= 1.0:
        raise InvalidParameterError(f"overlap must lie in [0, 1], got {overlap}")
    if n < 20:
        raise InvalidParameterError(f"synthetic classification needs n >= 20, got {n}")
    counts = _group_counts(scenario, n)
    if min(counts.values()) < 1:
        raise InvalidParameterError(f"n={n} too small to realize every label group: {counts}")
    process = "lpbf" if scenario == "lpbf_like" else "ded"
    rng = stream(seed, "synth")
    cp = SPECIFIC_HEAT[process]
    shift = (1.0 - overlap) * _DISPLACEMENT[process]
    factor = {Label.NO_DEFECT.value: 1.0, Label.DEFECT.value: math.exp(shift),
              Label.INCONCLUSIVE.value: math.exp(0.5 * shift)}

    labels = np.concatenate([[lab] * k for lab, k in counts.items()])
    labels = labels[rng.permutation(n)]
    f = np.array([factor[lab] for lab in labels])

    if process == "lpbf":
        speed = 800.0 * f * np.exp(_SPEED_NOISE * rng.standard_normal(n))
        energy = 5e-4 * np.exp(_ENERGY_NOISE * rng.standard_normal(n))
        power = energy * cp * speed
        rest = np.column_stack([
            30.0 + 4.0 * rng.standard_normal(n),
            0.08 + 0.005 * rng.standard_normal(n),
            0.04 + 0.004 * generalized_gaussian(rng, 4.0, n),
            3.9e-6 * np.exp(0.03 * rng.standard_normal(n)),
        ])
    else:
        speed = 7.0 * f * np.exp(_SPEED_NOISE * rng.standard_normal(n))
        energy = 0.075 * np.exp(_ENERGY_NOISE * rng.standard_normal(n))
        power = energy * cp * speed
        rest = np.column_stack([
            2.5 + 0.25 * rng.standard_normal(n),
            6.0 + 1.0 * generalized_gaussian(rng, 4.0, n),
            20.0 + 2.0 * rng.standard_normal(n),
            0.8 + 0.05 * rng.standard_t(5.0, n),
        ])
    rows = np.column_stack([power, speed, rest])
    return Dataset(PRESETS[process], rows, labels,
                   provenance=f"synth:{scenario}:n={n}:seed={seed}:overlap={overlap}")
