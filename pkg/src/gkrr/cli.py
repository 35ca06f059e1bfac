"""Command-line interface: selection, fitting, prediction, experiments,
verification, and plot emission.

Exit codes: 0 success, 2 input error (files, flags), 3 computation error
(selector or factorization failures). Every subcommand is deterministic given
its flags and seed; floats are printed at 17 significant digits so re-runs
are byte-identical.
"""

from __future__ import annotations

import argparse
import csv as _csv
import sys

import numpy as np

from . import bandwidth, evaluate, krr, plotting, verify
from .data import CsvFormatError, Dataset, generate_synthetic, load_csv, write_csv
from .linalg import FactorizationError


class _InputError(Exception):
    """User-input problem (bad file, incompatible flags): exit code 2."""


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _parse_values(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise _InputError(f"cannot parse --values {text!r}: {exc}") from None


def _parse_methods(text: str) -> tuple[str, ...]:
    methods = tuple(tok.strip() for tok in text.split(",") if tok.strip())
    for m in methods:
        if m not in bandwidth.METHODS:
            raise _InputError(f"unknown method {m!r}; choose from {bandwidth.METHODS}")
    if not methods:
        raise _InputError("empty --methods list")
    return methods


def _parse_test_size(text: str):
    try:
        v = float(text)
    except ValueError:
        raise _InputError(f"cannot parse --test-size {text!r}") from None
    if v <= 0:
        raise _InputError("--test-size must be positive")
    return v if v < 1.0 else int(round(v))


def _load_dataset(path, has_header: bool) -> Dataset:
    try:
        return load_csv(path, has_header=has_header)
    except (CsvFormatError, OSError) as exc:
        raise _InputError(str(exc)) from exc


def _load_features(path, has_header: bool, expected_p: int) -> np.ndarray:
    """Read a feature-only CSV (exactly ``expected_p`` numeric columns)."""
    rows = []
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            for line_no, record in enumerate(_csv.reader(fh)):
                if not record:
                    continue
                if has_header and line_no == 0:
                    continue
                if len(record) != expected_p:
                    raise _InputError(
                        f"{path}: row {len(rows) + 1} has {len(record)} columns, "
                        f"model expects {expected_p}"
                    )
                try:
                    rows.append([float(tok) for tok in record])
                except ValueError as exc:
                    raise _InputError(f"{path}: row {len(rows) + 1}: {exc}") from None
    except OSError as exc:
        raise _InputError(str(exc)) from exc
    if not rows:
        raise _InputError(f"{path}: no data rows")
    return np.asarray(rows, dtype=float)


def _explicit_grid(args, l_max_source: Dataset | None):
    """Build a CV grid when --grid-max is given; otherwise defer to defaults."""
    if args.grid_max is None:
        return None
    if args.grid_max <= args.grid_min:
        raise _InputError("--grid-max must exceed --grid-min")
    return np.geomspace(args.grid_min, args.grid_max, args.grid_size)


def cmd_select(args) -> int:
    data = _load_dataset(args.input, args.header)
    grid = _explicit_grid(args, data)
    res = bandwidth.select_bandwidth(
        args.method, data, args.lam, folds=args.folds, grid=grid,
        grid_size=args.grid_size, grid_min=args.grid_min, seed=args.seed,
    )
    print(f"sigma={_fmt(res.sigma)}")
    print(f"method={res.method}")
    if res.regime is not None:
        print(f"regime={res.regime.value}")
        print(f"clamped={'true' if res.clamped else 'false'}")
        print(f"j2a={_fmt(res.j2a_at_sigma)}")
    if args.output and res.cv_curve is not None:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write("sigma,mean_loss\n")
            for s, loss in res.cv_curve:
                fh.write(f"{_fmt(s)},{_fmt(loss)}\n")
    return 0


def cmd_fit(args) -> int:
    data = _load_dataset(args.input, args.header)
    if args.sigma is not None:
        if args.sigma <= 0:
            raise _InputError("--sigma must be positive")
        sigma = args.sigma
    else:
        grid = _explicit_grid(args, data)
        sigma = bandwidth.select_bandwidth(
            args.method, data, args.lam, folds=args.folds, grid=grid,
            grid_size=args.grid_size, grid_min=args.grid_min, seed=args.seed,
        ).sigma
    model = krr.fit(data, sigma, args.lam)
    krr.save_model(model, args.output)
    print(f"sigma={_fmt(sigma)}")
    print(f"n={model.n}")
    print(f"model={args.output}")
    return 0


def cmd_predict(args) -> int:
    try:
        model = krr.load_model(args.model)
    except (OSError, ValueError) as exc:
        raise _InputError(str(exc)) from exc
    X = _load_features(args.input, args.header, model.p)
    preds = krr.predict(model, X)
    with open(args.output, "w", encoding="utf-8", newline="") as fh:
        for v in preds:
            fh.write(_fmt(v) + "\n")
    print(f"predictions={len(preds)}")
    return 0


def cmd_synth(args) -> int:
    if args.n < 1:
        raise _InputError("--n must be >= 1")
    if args.noise_sd < 0:
        raise _InputError("--noise-sd must be >= 0")
    data = generate_synthetic(args.n, args.noise_sd, args.seed)
    write_csv(data, args.output)
    print(f"rows={data.n}")
    return 0


def cmd_sweep(args) -> int:
    values = _parse_values(args.values)
    if not values:
        raise _InputError("--values is empty")
    methods = _parse_methods(args.methods)
    data = _load_dataset(args.input, args.header) if args.input else None
    test_size = _parse_test_size(args.test_size)
    if args.axis == evaluate.AXIS_N:
        kwargs = {"fixed_lambda": args.lam}
        values = [int(v) for v in values]
    else:
        if args.n is None:
            raise _InputError("a lambda-axis sweep needs --n (fixed training size)")
        kwargs = {"fixed_n": args.n}
    report = evaluate.run_sweep(
        args.axis, values, data=data, noise_sd=args.noise_sd,
        repeats=args.repeats, test_size=test_size, methods=methods,
        folds=args.folds, grid_size=args.grid_size, grid_min=args.grid_min,
        seed=args.seed, threads=args.threads, **kwargs,
    )
    with open(args.output, "w", encoding="utf-8", newline="") as fh:
        fh.write(evaluate.sweep_to_csv(report))
    print(f"points={len(report.points)}")
    print(f"report={args.output}")
    return 0


def cmd_jackknife(args) -> int:
    data = _load_dataset(args.input, args.header)
    methods = _parse_methods(args.methods)
    if not 0.0 <= args.holdout < 1.0:
        raise _InputError("--holdout must be in [0, 1)")
    if args.holdout > 0.0:
        # reserve a seeded random reference slice; jackknife the remainder
        # and evaluate on the reference features
        n_ref = max(1, round(args.holdout * data.n))
        if data.n - n_ref < 3:
            raise _InputError("holdout leaves fewer than 3 training rows")
        perm = np.random.default_rng(
            evaluate._derived_seed(args.seed, 5, 0)
        ).permutation(data.n)
        ref = np.sort(perm[:n_ref])
        keep = np.sort(perm[n_ref:])
        eval_grid = data.features[ref]
        data = data.subset(keep)
    elif data.p == 1:
        lo = float(data.features.min())
        hi = float(data.features.max())
        eval_grid = np.linspace(lo, hi, args.eval_points).reshape(-1, 1)
    else:
        eval_grid = data.features
    report = evaluate.run_jackknife(
        data, args.lam, methods=methods, eval_grid=eval_grid, folds=args.folds,
        grid_size=args.grid_size, grid_min=args.grid_min, seed=args.seed,
        threads=args.threads,
    )
    with open(args.output, "w", encoding="utf-8", newline="") as fh:
        fh.write(evaluate.jackknife_to_csv(report))
    for m in report.methods:
        print(
            f"method={m} mean_sigma={_fmt(report.mean_sigma[m])} "
            f"sd_sigma={_fmt(report.sd_sigma[m])} excluded={report.excluded[m]}"
        )
    print(f"report={args.output}")
    return 0


_CLAIM_FLAGS = {
    "prop1": verify.CLAIM_PROP1,
    "prop2": verify.CLAIM_PROP2,
    "prop3": verify.CLAIM_PROP3,
    "prop4": verify.CLAIM_PROP4,
    "bermanis": verify.CLAIM_BERMANIS,
}


def _verify_points(args) -> np.ndarray:
    if args.p == 1:
        return np.linspace(0.0, args.lmax, args.n).reshape(-1, 1)
    rng = np.random.default_rng(args.seed)
    return args.lmax * rng.uniform(0.0, 1.0, size=(args.n, args.p))


def cmd_verify(args) -> int:
    claim = _CLAIM_FLAGS[args.claim]
    if claim == verify.CLAIM_PROP1:
        params = bandwidth.JacobianParams(n=args.n, p=args.p, l_max=args.lmax, lam=args.lam)
        report = verify.check_prop1_regimes(params)
    elif claim == verify.CLAIM_PROP2:
        if args.p == 1:
            data = generate_synthetic(args.n, args.noise_sd, args.seed)
        else:
            rng = np.random.default_rng(args.seed)
            data = Dataset(rng.uniform(0.0, 1.0, size=(args.n, args.p)),
                           rng.normal(0.0, 1.0, size=args.n))
        sigma = args.sigma or bandwidth.select_jacobian(data.features, args.lam).sigma
        report = verify.check_prop2_chain(data, sigma, args.lam,
                                          trials=args.trials, seed=args.seed)
    elif claim == verify.CLAIM_PROP3:
        sigma = args.sigma or 1.0
        report = verify.check_prop3_gradmax(sigma)
    else:
        X = _verify_points(args)
        sigma = args.sigma or bandwidth.select_jacobian(X, args.lam).sigma
        if claim == verify.CLAIM_PROP4:
            report = verify.check_prop4(X, sigma, args.lam)
        else:
            report = verify.check_bermanis_count(X, sigma, args.delta)
    verdict = "PASS" if report.passed else "FAIL"
    print(
        f"claim={report.claim} trials={report.trials} violations={report.violations} "
        f"worst_margin={_fmt(report.worst_margin)} seed={report.seed} {verdict}"
    )
    print(f"config={report.config}")
    if args.output:
        verify.write_reports_csv([report], args.output)
    return 0


def cmd_plot(args) -> int:
    try:
        report = evaluate.read_sweep_csv(args.input)
    except (OSError, ValueError) as exc:
        raise _InputError(str(exc)) from exc
    plotting.write_sweep_svg(report, args.output)
    print(f"plot={args.output}")
    return 0


def _add_common(p, output_required=False):
    p.add_argument("--lambda", dest="lam", type=float, default=1e-3,
                   help="ridge regularization strength")
    p.add_argument("--seed", type=int, default=0, help="base RNG seed")
    p.add_argument("--output", required=output_required, default=None,
                   help="output file path")


def _add_selector_flags(p):
    p.add_argument("--method", default="jacobian", choices=bandwidth.METHODS,
                   help="bandwidth selection method")
    p.add_argument("--folds", type=int, default=10, help="CV fold count")
    p.add_argument("--grid-size", type=int, default=100, help="CV grid size")
    p.add_argument("--grid-min", type=float, default=0.01, help="CV grid lower bound")
    p.add_argument("--grid-max", type=float, default=None,
                   help="CV grid upper bound (default: data diameter)")


def _add_input(p, required=True):
    p.add_argument("--input", required=required, default=None, help="input CSV path")
    p.add_argument("--header", action="store_true",
                   help="input CSV has a single header row")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gkrr",
        description="Gaussian kernel ridge regression with Jacobian-control "
                    "bandwidth selection.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser("select", help="select a bandwidth for a dataset", formatter_class=fmt)
    _add_input(p)
    _add_selector_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("fit", help="fit a model and write it to disk", formatter_class=fmt)
    _add_input(p)
    _add_selector_flags(p)
    p.add_argument("--sigma", type=float, default=None,
                   help="bandwidth override (skips selection)")
    _add_common(p, output_required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="predict from a saved model", formatter_class=fmt)
    p.add_argument("--model", required=True, help="model file from 'fit'")
    _add_input(p)
    _add_common(p, output_required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("synth", help="generate the synthetic sine dataset", formatter_class=fmt)
    p.add_argument("--n", type=int, required=True, help="number of observations")
    p.add_argument("--noise-sd", type=float, default=0.1, help="noise standard deviation")
    _add_common(p, output_required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("sweep", help="n- or lambda-sweep with repeated splits", formatter_class=fmt)
    p.add_argument("--axis", required=True, choices=(evaluate.AXIS_N, evaluate.AXIS_LAMBDA))
    p.add_argument("--values", required=True, help="comma-separated axis values")
    p.add_argument("--n", type=int, default=None, help="fixed training size (lambda axis)")
    p.add_argument("--repeats", type=int, default=100, help="replicates per axis value")
    p.add_argument("--test-size", default="1000",
                   help="test observations (count, or fraction below 1)")
    p.add_argument("--methods", default=",".join(bandwidth.METHODS),
                   help="comma-separated methods to compare")
    p.add_argument("--noise-sd", type=float, default=0.1,
                   help="noise level for synthetic draws")
    p.add_argument("--threads", type=int, default=1, help="replicate thread pool size")
    _add_input(p, required=False)
    _add_selector_flags(p)
    _add_common(p, output_required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("jackknife", help="leave-one-out stability study", formatter_class=fmt)
    _add_input(p)
    p.add_argument("--methods", default=",".join(bandwidth.METHODS),
                   help="comma-separated methods to compare")
    p.add_argument("--holdout", type=float, default=0.0,
                   help="fraction reserved as the evaluation reference set")
    p.add_argument("--eval-points", type=int, default=100,
                   help="evaluation grid size for 1-D data (no holdout)")
    p.add_argument("--threads", type=int, default=1, help="replicate thread pool size")
    _add_selector_flags(p)
    _add_common(p, output_required=True)
    p.set_defaults(func=cmd_jackknife)

    p = sub.add_parser("verify", help="run a numerical bound check", formatter_class=fmt)
    p.add_argument("--claim", required=True, choices=sorted(_CLAIM_FLAGS))
    p.add_argument("--n", type=int, default=10, help="instance size")
    p.add_argument("--p", type=int, default=1, help="feature dimension")
    p.add_argument("--sigma", type=float, default=None,
                   help="bandwidth (default: Jacobian selection)")
    p.add_argument("--lmax", type=float, default=1.0, help="data diameter for generated points")
    p.add_argument("--delta", type=float, default=0.5, help="spectrum cutoff for bermanis")
    p.add_argument("--trials", type=int, default=100, help="random trials for prop2")
    p.add_argument("--noise-sd", type=float, default=0.1,
                   help="noise level for prop2 synthetic data")
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("plot", help="render a sweep report as SVG", formatter_class=fmt)
    p.add_argument("--input", required=True, help="sweep report CSV")
    _add_common(p, output_required=True)
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on flag errors and 0 on --help; rewrap 2 for clarity
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _InputError as exc:
        print(f"gkrr: input error: {exc}", file=sys.stderr)
        return 2
    except (CsvFormatError, OSError) as exc:
        print(f"gkrr: input error: {exc}", file=sys.stderr)
        return 2
    except (FactorizationError, ValueError, ZeroDivisionError, RuntimeError,
            np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"gkrr: error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
