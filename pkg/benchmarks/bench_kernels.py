"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--n 20000] [--d 6] [--repeat 5]

Reports per-call timings for the component log-density and responsibility
normalization, a full E-step, and a complete ``fit_em`` run, for every
available backend, and checks that the backends agree.
"""
import argparse
import time

import numpy as np

from pigmm import kernels
from pigmm.mixture import EmConfig, e_step, fit_em


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def build_inputs(n, d, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d))
    A = rng.standard_normal((d, d))
    cov = A @ A.T + d * np.eye(d)
    L = np.linalg.cholesky(cov)
    logdet = 2.0 * np.log(np.diag(L)).sum()
    mean = rng.standard_normal(d)
    A3 = rng.standard_normal((n, 3)) * 5.0
    fit_data = np.vstack([rng.standard_normal((n // 3, d)) + 3.0 * k for k in range(3)])
    return X, mean, L, logdet, A3, fit_data


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--d", type=int, default=6)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    X, mean, L, logdet, A3, fit_data = build_inputs(args.n, args.d, args.seed)
    seeded = fit_em(fit_data, 3, EmConfig(seed=args.seed, n_restarts=1))
    backends = kernels.available_backends()
    results, outputs = {}, {}
    previous = kernels.current_backend()
    try:
        for name in backends:
            kernels.use_backend(name)
            row = {}
            row["component_logpdf"], outputs[name] = best_of(
                lambda: kernels.component_logpdf(X, mean, L, logdet), args.repeat)
            row["normalize_log_rows"], _ = best_of(lambda: kernels.normalize_log_rows(A3), args.repeat)
            row["e_step (M=3)"], _ = best_of(lambda: e_step(fit_data, seeded), args.repeat)
            row["fit_em (M=3, 4 restarts)"], _ = best_of(
                lambda: fit_em(fit_data, 3, EmConfig(seed=args.seed)), max(1, args.repeat // 2))
            results[name] = row
    finally:
        kernels.use_backend(previous)

    print(f"n={args.n} d={args.d} best of {args.repeat}; backends: {', '.join(backends)}")
    width = max(len(k) for k in next(iter(results.values())))
    header = f"{'kernel':<{width}}  " + "  ".join(f"{b:>12}" for b in backends)
    if "compiled" in results and "python" in results:
        header += "  speedup"
    print(header)
    for key in next(iter(results.values())):
        line = f"{key:<{width}}  " + "  ".join(f"{results[b][key] * 1e6:>10.1f}us" for b in backends)
        if "compiled" in results and "python" in results:
            line += f"  {results['python'][key] / results['compiled'][key]:>6.2f}x"
        print(line)
    if len(outputs) > 1:
        vals = list(outputs.values())
        diff = max(float(np.max(np.abs(v - vals[0]))) for v in vals[1:])
        print(f"max |difference| between backends on component_logpdf: {diff:.2e}")


if __name__ == "__main__":
    main()
