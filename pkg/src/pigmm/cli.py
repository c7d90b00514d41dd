"""Command-line interface: ``pigmm {synth,split,train,predict,evaluate,boundary}``.

Failures print one line ``error <CODE>: <message>`` to stderr and exit 1.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from pigmm import __version__
from pigmm.classifier import (
    INCONCLUSIVE,
    ClassifierConfig,
    decision_boundary_grid,
    evaluate,
    train_classifier,
)
from pigmm.data import format_float, load_csv, split, synth_classification, synth_generate, write_csv
from pigmm.errors import InvalidParameterError, LabelError, PigmmError, SchemaError
from pigmm.features import EnergyFeatureConfig
from pigmm.mixture import EmConfig
from pigmm.persist import fingerprint, load_model, save_model


def _bool(text):
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _components(text):
    if text == "auto":
        return "auto"
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'auto', got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("components must be >= 1")
    return value


def _pairs(text):
    """Parse ``a=b,c=d``."""
    out = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def _energy(text):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("--energy expects P_COL,V_COL,CP (CP: number or column)")
    p, v, cp = parts
    try:
        cp = float(cp)
    except ValueError:
        pass
    return p, v, cp


def _csv_list(text):
    return tuple(s.strip() for s in text.split(",") if s.strip())


def _write_rows(path, header, rows, preamble=None):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        if preamble:
            fh.write(preamble + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _load_for_model(clf, provenance, path, label_col):
    ds = load_csv(path, "custom", label_column=label_col)
    expected = provenance.get("data_columns", list(clf.input_columns))
    missing = [c for c in expected if c not in ds.names]
    extra = [c for c in ds.names if c not in expected]
    if missing or extra:
        raise SchemaError(f"data columns do not match the model: missing {missing}, extra {extra}")
    return ds.select(clf.input_columns)


def cmd_synth(args):
    if args.scenario:
        ds = synth_classification(args.scenario, args.n, args.seed, args.overlap)
    else:
        ds = synth_generate(args.shape, args.n, args.d, args.seed, separation=args.separation,
                            beta=args.beta, dof=args.dof)
    write_csv(ds, args.out)
    counts = ds.label_counts()
    print("label counts: " + " ".join(f"{k}={v}" for k, v in counts.items()))
    return 0


def cmd_split(args):
    ds = load_csv(args.data, args.schema, args.label_col, args.label_map, require_labels=True)
    train, test = split(ds, args.test_fraction, args.seed, args.stratified)
    write_csv(train, args.train_out, args.label_col)
    write_csv(test, args.test_out, args.label_col)
    for name, part in (("train", train), ("test", test)):
        counts = part.label_counts()
        print(f"{name}: n={part.n} " + " ".join(f"{k}={v}" for k, v in counts.items()))
    return 0


def cmd_train(args):
    ds = load_csv(args.data, args.schema, args.label_col, args.label_map, require_labels=True)
    energy = None
    if args.energy:
        p, v, cp = args.energy
        energy = EnergyFeatureConfig(p, v, cp, replace_inputs=args.replace_inputs)
    em = EmConfig(seed=args.seed, covariance_kind=args.covariance, ridge=args.ridge,
                  n_restarts=args.restarts, max_iter=args.max_iter)
    config = ClassifierConfig(components=args.components, em=em, priors=args.priors,
                              energy=energy, standardize=args.standardize,
                              features=args.features)
    clf = train_classifier(ds, config)
    provenance = {
        "seed": args.seed,
        "data_fingerprint": fingerprint(args.data),
        "data_columns": list(ds.names),
        "schema": args.schema,
        "tool_version": __version__,
    }
    save_model(clf, args.out, provenance)
    for cls, model, prior in zip(clf.classes, clf.models, clf.priors):
        info = model.fit_info
        print(f"class {cls}: M={model.n_components} avg_loglik={format_float(info.final_avg_loglik)} "
              f"iterations={info.n_iterations} converged={str(info.converged).lower()} "
              f"prior={format_float(prior)}")
    print("priors: " + " ".join(f"{c}={format_float(p)}" for c, p in zip(clf.classes, clf.priors)))
    if clf.pipeline.dropped_columns:
        print("dropped zero-variance columns: " + ",".join(clf.pipeline.dropped_columns))
    return 0


def cmd_predict(args):
    clf, prov = load_model(args.model)
    ds = _load_for_model(clf, prov, args.data, args.label_col)
    probs, _ = clf.predict_proba(ds.rows)
    decisions = clf.predict(ds.rows, threshold=args.reject_threshold)
    header = ["row_id"] + [f"p_{c}" for c in clf.classes] + ["prediction"]
    rows = ([i] + [format_float(p) for p in row] + [d]
            for i, (row, d) in enumerate(zip(probs, decisions)))
    _write_rows(args.out, header, rows)
    counts = {c: int(np.sum(decisions == c)) for c in (*clf.classes, INCONCLUSIVE)}
    print(f"predicted {ds.n} rows: " + " ".join(f"{k}={v}" for k, v in counts.items()))
    return 0


def cmd_evaluate(args):
    clf, prov = load_model(args.model)
    ds = load_csv(args.data, "custom", args.label_col, args.label_map)
    if not np.any(np.isin(ds.labels, clf.classes)):
        raise LabelError(f"{args.data}: no labeled rows to evaluate")
    expected = prov.get("data_columns", list(clf.input_columns))
    missing = [c for c in expected if c not in ds.names]
    extra = [c for c in ds.names if c not in expected]
    if missing or extra:
        raise SchemaError(f"data columns do not match the model: missing {missing}, extra {extra}")
    report = evaluate(clf, ds.select(clf.input_columns), threshold=args.reject_threshold)
    text = json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    sys.stdout.write(text)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    return 0


def cmd_boundary(args):
    clf, _ = load_model(args.model)
    fill = None
    if args.fill != "median":
        try:
            fill = {k: float(v) for k, v in _pairs(args.fill).items()}
        except ValueError as exc:
            raise InvalidParameterError(f"--fill values must be numeric: {exc}") from None
    gx, gy, probs, decisions, used = decision_boundary_grid(
        clf, args.x, args.y, (args.xmin, args.xmax, args.ymin, args.ymax), args.resolution, fill
    )
    preamble = "# fill: " + ";".join(f"{k}={format_float(v)}" for k, v in used.items())
    header = [args.x, args.y] + [f"p_{c}" for c in clf.classes] + ["prediction"]
    rows = ([format_float(x), format_float(y)] + [format_float(p) for p in pr] + [d]
            for x, y, pr, d in zip(gx, gy, probs, decisions))
    _write_rows(args.out, header, rows, preamble)
    print(f"wrote {gx.size} grid rows to {args.out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="pigmm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"pigmm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def data_flags(p, schema=True):
        p.add_argument("--data", required=True)
        if schema:
            p.add_argument("--schema", choices=("lpbf", "ded", "custom"), default="custom")
        p.add_argument("--label-col", default="label")
        p.add_argument("--label-map", type=_pairs, default=None,
                       help="map raw label strings, e.g. ok=no_defect,bad=defect")

    p = sub.add_parser("synth", help="write a seeded synthetic dataset")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--shape", choices=("unimodal", "bimodal", "flattened", "heavy_tailed"))
    g.add_argument("--scenario", choices=("lpbf_like", "ded_like"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--overlap", type=float, default=0.25)
    p.add_argument("--separation", type=float, default=4.0)
    p.add_argument("--beta", type=float, default=4.0)
    p.add_argument("--dof", type=float, default=3.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("split", help="seeded train/test split")
    data_flags(p)
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stratified", type=_bool, default=True)
    p.add_argument("--train-out", required=True)
    p.add_argument("--test-out", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", help="fit one mixture per class and write a model file")
    data_flags(p)
    p.add_argument("--components", type=_components, default="auto")
    p.add_argument("--covariance", choices=("full", "diag"), default="full")
    p.add_argument("--energy", type=_energy, default=None, metavar="P_COL,V_COL,CP")
    p.add_argument("--replace-inputs", action="store_true",
                   help="drop the power and speed columns once the energy column is added")
    p.add_argument("--standardize", type=_bool, default=True)
    p.add_argument("--priors", choices=("empirical", "uniform"), default="empirical")
    p.add_argument("--features", type=_csv_list, default=None, help="comma-separated raw columns")
    p.add_argument("--ridge", type=float, default=1e-6)
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="posterior and decision per row")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--label-col", default="label")
    p.add_argument("--reject-threshold", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="accuracy, confusion matrix, precision/recall")
    p.add_argument("--model", required=True)
    data_flags(p, schema=False)
    p.add_argument("--reject-threshold", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("boundary", help="export a 2-D decision-boundary grid")
    p.add_argument("--model", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    for name in ("xmin", "xmax", "ymin", "ymax"):
        p.add_argument(f"--{name}", type=float, required=True)
    p.add_argument("--resolution", type=int, default=100)
    p.add_argument("--fill", default="median", help="'median' or COL=VALUE,...")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_boundary)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PigmmError as exc:
        message = " ".join(str(exc).split())
        print(f"error {exc.code}: {message}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error E_IO: {exc.strerror or exc}: {exc.filename}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
