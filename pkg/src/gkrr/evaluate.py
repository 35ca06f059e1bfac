"""Experiment harness: R^2 scoring, jackknife statistics, and n/lambda sweeps.

Replicates are independent: each draws its own seeds from a SeedSequence
rooted at (seed, replicate index), so parallel execution over replicates
produces reports identical to serial execution, and a lambda-axis sweep
reuses the same data and folds at every axis value (paired comparisons).

Per-replicate selector or fit failures exclude that replicate for the failing
method only; exclusion counts are first-class output, never imputed.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import krr
from .bandwidth import METHODS, select_bandwidth
from .data import Dataset, generate_synthetic, make_jackknife
from .linalg import FactorizationError

AXIS_N = "n"
AXIS_LAMBDA = "lambda"

SWEEP_CSV_COLUMNS = (
    "axis,axis_value,method,mean_r2,p05_r2,p95_r2,"
    "mean_sigma,p05_sigma,p95_sigma,sd_sigma,excluded,repeats,seed"
)


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _derived_seed(*parts: int) -> int:
    """Deterministic 64-bit sub-seed from integer parts (PCG64 SeedSequence)."""
    ss = np.random.SeedSequence([int(p) for p in parts])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def r_squared(y_true, y_pred) -> float:
    """1 - sum((y - yhat)^2) / sum((y - ybar)^2); negative for models worse
    than predicting the mean. ``ybar`` is the mean of ``y_true`` over the
    evaluation set."""
    y_true = np.asarray(y_true, dtype=float).reshape(-1)
    y_pred = np.asarray(y_pred, dtype=float).reshape(-1)
    if y_true.shape != y_pred.shape:
        raise ValueError(f"length mismatch: {y_true.shape[0]} vs {y_pred.shape[0]}")
    if y_true.shape[0] < 2:
        raise ValueError("need at least 2 observations")
    ss_tot = float(np.sum((y_true - y_true.mean()) ** 2))
    if ss_tot == 0.0:
        raise ValueError("y_true is constant: R^2 undefined")
    ss_res = float(np.sum((y_true - y_pred) ** 2))
    return 1.0 - ss_res / ss_tot


def _run_methods(train: Dataset, lam: float, methods, folds, grid_size, grid_min, fold_seed):
    """Select, fit and return {method: (sigma, model)} with failures -> None."""
    out = {}
    for m in methods:
        try:
            res = select_bandwidth(m, train, lam, folds=folds, grid_size=grid_size,
                                   grid_min=grid_min, seed=fold_seed)
            model = krr.fit(train, res.sigma, lam)
            out[m] = (res.sigma, model)
        except (ValueError, FactorizationError):
            out[m] = None
    return out


def _map_replicates(fn, count: int, threads: int) -> list:
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, range(count)))
    return [fn(r) for r in range(count)]


@dataclass(frozen=True)
class JackknifeReport:
    """Leave-one-out means and spreads of predictions and bandwidths."""

    grid: np.ndarray  # m x p evaluation inputs
    methods: tuple[str, ...]
    mean_prediction: dict  # method -> length-m array
    sd_prediction: dict
    mean_sigma: dict
    sd_sigma: dict
    excluded: dict  # method -> replicates dropped after errors
    replicates: int


def run_jackknife(
    data: Dataset,
    lam: float,
    methods=METHODS,
    eval_grid: np.ndarray | None = None,
    folds: int = 10,
    grid_size: int = 100,
    grid_min: float = 0.01,
    seed: int = 0,
    threads: int = 1,
) -> JackknifeReport:
    """Refit with each observation left out once; aggregate over the n fits.

    Every replicate selects a bandwidth per method, fits, and predicts on
    ``eval_grid`` (default: the training features). Standard deviations use
    the n-1 denominator over the replicates that succeeded.
    """
    if data.n < 3:
        raise ValueError(f"jackknife harness needs n >= 3, got {data.n}")
    methods = tuple(methods)
    if eval_grid is None:
        eval_grid = data.features
    eval_grid = np.atleast_2d(np.asarray(eval_grid, dtype=float))
    plans = make_jackknife(data.n)

    def replicate(i: int):
        train = data.subset(plans[i].train_indices)
        fold_seed = _derived_seed(seed, 3, i)
        fitted = _run_methods(train, lam, methods, folds, grid_size, grid_min, fold_seed)
        out = {}
        for m, sm in fitted.items():
            out[m] = None if sm is None else (sm[0], krr.predict(sm[1], eval_grid))
        return out

    results = _map_replicates(replicate, data.n, threads)

    mean_pred, sd_pred, mean_sig, sd_sig, excl = {}, {}, {}, {}, {}
    m_points = eval_grid.shape[0]
    for m in methods:
        rows = [res[m] for res in results if res[m] is not None]
        excl[m] = data.n - len(rows)
        if not rows:
            mean_pred[m] = np.full(m_points, np.nan)
            sd_pred[m] = np.full(m_points, np.nan)
            mean_sig[m] = math.nan
            sd_sig[m] = math.nan
            continue
        sigmas = np.array([r[0] for r in rows])
        preds = np.array([r[1] for r in rows])
        mean_pred[m] = preds.mean(axis=0)
        sd_pred[m] = preds.std(axis=0, ddof=1) if len(rows) > 1 else np.zeros(m_points)
        mean_sig[m] = float(sigmas.mean())
        sd_sig[m] = float(sigmas.std(ddof=1)) if len(rows) > 1 else 0.0
    return JackknifeReport(
        grid=eval_grid,
        methods=methods,
        mean_prediction=mean_pred,
        sd_prediction=sd_pred,
        mean_sigma=mean_sig,
        sd_sigma=sd_sig,
        excluded=excl,
        replicates=data.n,
    )


def jackknife_to_csv(report: JackknifeReport) -> str:
    """Tidy CSV: one row per method x grid point.

    Columns: method, point, x0..x{p-1}, mean_prediction, sd_prediction,
    mean_sigma, sd_sigma, excluded, replicates. The per-method summary values
    repeat on each of that method's rows.
    """
    p = report.grid.shape[1]
    coord_cols = ",".join(f"x{j}" for j in range(p))
    lines = [
        f"method,point,{coord_cols},mean_prediction,sd_prediction,"
        "mean_sigma,sd_sigma,excluded,replicates"
    ]
    for m in report.methods:
        for i in range(report.grid.shape[0]):
            coords = ",".join(_fmt(v) for v in report.grid[i])
            lines.append(
                f"{m},{i},{coords},{_fmt(report.mean_prediction[m][i])},"
                f"{_fmt(report.sd_prediction[m][i])},{_fmt(report.mean_sigma[m])},"
                f"{_fmt(report.sd_sigma[m])},{report.excluded[m]},{report.replicates}"
            )
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class MethodStats:
    """Summary of one method at one axis point."""

    mean_r2: float
    p05_r2: float
    p95_r2: float
    mean_sigma: float
    p05_sigma: float
    p95_sigma: float
    sd_sigma: float
    excluded: int


@dataclass(frozen=True)
class SweepPoint:
    axis_value: float
    stats: dict  # method -> MethodStats


@dataclass(frozen=True)
class SweepReport:
    """Per-axis-point, per-method R^2 and sigma summaries over repeats."""

    axis: str  # AXIS_N or AXIS_LAMBDA
    methods: tuple[str, ...]
    points: tuple[SweepPoint, ...]
    repeats: int
    seed: int


def _summarize(values_r2: list[float], values_sigma: list[float], repeats: int) -> MethodStats:
    excluded = repeats - len(values_r2)
    if not values_r2:
        nan = math.nan
        return MethodStats(nan, nan, nan, nan, nan, nan, nan, excluded)
    r2 = np.asarray(values_r2)
    sg = np.asarray(values_sigma)
    p05_r2, p95_r2 = np.percentile(r2, [5.0, 95.0])  # type-7 linear interpolation
    p05_s, p95_s = np.percentile(sg, [5.0, 95.0])
    sd_s = float(sg.std(ddof=1)) if len(sg) > 1 else 0.0
    return MethodStats(
        mean_r2=float(r2.mean()),
        p05_r2=float(p05_r2),
        p95_r2=float(p95_r2),
        mean_sigma=float(sg.mean()),
        p05_sigma=float(p05_s),
        p95_sigma=float(p95_s),
        sd_sigma=sd_s,
        excluded=excluded,
    )


def run_sweep(
    axis: str,
    axis_values,
    data: Dataset | None = None,
    noise_sd: float = 0.1,
    fixed_n: int | None = None,
    fixed_lambda: float | None = None,
    repeats: int = 100,
    test_size=1000,
    methods=METHODS,
    folds: int = 10,
    grid_size: int = 100,
    grid_min: float = 0.01,
    seed: int = 0,
    threads: int = 1,
) -> SweepReport:
    """Vary n at fixed lambda, or lambda at fixed n, over repeated splits.

    With ``data=None`` each replicate draws fresh synthetic training and test
    sets (``test_size`` must then be a count). With a Dataset, each replicate
    takes a random split: ``test_size`` observations held out (a float below
    1 is a fraction of the data), training sampled from the rest.

    Replicate seeds depend only on (seed, replicate), so a lambda sweep sees
    identical data and folds at every lambda.
    """
    if axis not in (AXIS_N, AXIS_LAMBDA):
        raise ValueError(f"axis must be {AXIS_N!r} or {AXIS_LAMBDA!r}, got {axis!r}")
    axis_values = [float(v) for v in axis_values]
    if not axis_values:
        raise ValueError("axis_values is empty")
    if repeats < 2:
        raise ValueError(f"repeats must be >= 2, got {repeats}")
    if axis == AXIS_N and fixed_lambda is None:
        raise ValueError("an n-axis sweep needs fixed_lambda")
    if axis == AXIS_LAMBDA and fixed_n is None:
        raise ValueError("a lambda-axis sweep needs fixed_n")
    methods = tuple(methods)

    def resolve_test_count(total: int | None) -> int:
        if isinstance(test_size, float) and test_size < 1.0:
            if total is None:
                raise ValueError("fractional test_size needs a concrete dataset")
            return max(1, round(test_size * total))
        return int(test_size)

    def build_split(r: int, n_train: int) -> tuple[Dataset, Dataset]:
        if data is None:
            train = generate_synthetic(n_train, noise_sd, _derived_seed(seed, 1, r))
            test = generate_synthetic(resolve_test_count(None), noise_sd, _derived_seed(seed, 2, r))
            return train, test
        t = resolve_test_count(data.n)
        if n_train + t > data.n:
            raise ValueError(
                f"cannot split {data.n} rows into train={n_train} plus test={t}"
            )
        perm = np.random.default_rng(_derived_seed(seed, 4, r)).permutation(data.n)
        test = data.subset(np.sort(perm[:t]))
        train = data.subset(np.sort(perm[t : t + n_train]))
        return train, test

    points = []
    for v in axis_values:
        n_train = int(v) if axis == AXIS_N else int(fixed_n)
        lam = float(fixed_lambda) if axis == AXIS_N else float(v)

        def replicate(r: int):
            train, test = build_split(r, n_train)
            fold_seed = _derived_seed(seed, 3, r)
            fitted = _run_methods(train, lam, methods, folds, grid_size, grid_min, fold_seed)
            out = {}
            for m, sm in fitted.items():
                if sm is None:
                    out[m] = None
                    continue
                try:
                    pred = krr.predict(sm[1], test.features)
                    out[m] = (sm[0], r_squared(test.response, pred))
                except (ValueError, FactorizationError):
                    out[m] = None
            return out

        results = _map_replicates(replicate, repeats, threads)
        stats = {}
        for m in methods:
            good = [res[m] for res in results if res[m] is not None]
            stats[m] = _summarize([g[1] for g in good], [g[0] for g in good], repeats)
        points.append(SweepPoint(axis_value=v, stats=stats))

    return SweepReport(
        axis=axis, methods=methods, points=tuple(points), repeats=repeats, seed=seed
    )


def sweep_to_csv(report: SweepReport) -> str:
    """Tidy CSV, one row per axis point x method, fixed column order."""
    lines = [SWEEP_CSV_COLUMNS]
    for pt in report.points:
        for m in report.methods:
            s = pt.stats[m]
            lines.append(
                f"{report.axis},{_fmt(pt.axis_value)},{m},{_fmt(s.mean_r2)},"
                f"{_fmt(s.p05_r2)},{_fmt(s.p95_r2)},{_fmt(s.mean_sigma)},"
                f"{_fmt(s.p05_sigma)},{_fmt(s.p95_sigma)},{_fmt(s.sd_sigma)},"
                f"{s.excluded},{report.repeats},{report.seed}"
            )
    return "\n".join(lines) + "\n"


def read_sweep_csv(path) -> SweepReport:
    """Parse a file written by ``sweep_to_csv`` back into a SweepReport."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != SWEEP_CSV_COLUMNS:
        raise ValueError(f"{path}: not a sweep report (unexpected header)")
    axis = None
    repeats = 0
    seed = 0
    order: list[float] = []
    per_point: dict[float, dict] = {}
    methods: list[str] = []
    for ln in lines[1:]:
        f = ln.split(",")
        if len(f) != 13:
            raise ValueError(f"{path}: malformed row {ln!r}")
        axis = f[0]
        v = float(f[1])
        m = f[2]
        if m not in methods:
            methods.append(m)
        if v not in per_point:
            per_point[v] = {}
            order.append(v)
        per_point[v][m] = MethodStats(
            mean_r2=float(f[3]), p05_r2=float(f[4]), p95_r2=float(f[5]),
            mean_sigma=float(f[6]), p05_sigma=float(f[7]), p95_sigma=float(f[8]),
            sd_sigma=float(f[9]), excluded=int(f[10]),
        )
        repeats = int(f[11])
        seed = int(f[12])
    points = tuple(SweepPoint(axis_value=v, stats=per_point[v]) for v in order)
    return SweepReport(axis=axis, methods=tuple(methods), points=points,
                       repeats=repeats, seed=seed)
