"""Benchmark runs, penalty selection by validation or cross-validation.

A benchmark run is described by a small spec dictionary (also accepted as a
JSON document by the CLI)::

    {
      "id": "cs-smoke",
      "generator": "gaussian_ensemble",
      "params": {"k": 64, "n": 256, "s": 8, "noise_variance": 1e-4},
      "trials": 3,
      "solvers": ["gpsr", "cd"],
      "hybrid": [false, true],
      "eta": null,            # null -> eta_scale * ||grad f(0)||_inf
      "eta_scale": 0.1,
      "master_seed": 7,
      "driver": {"beta1": 15}
    }

Hybrid and plain runs of the same trial share the identical instance seed,
so their objectives are directly comparable.  Numeric record fields are
deterministic given the spec and master seed; wall times are not.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import asdict, dataclass

import numpy as np

from .datagen import (
    Dataset,
    correlated_dataset,
    noisy_regression_dataset,
    signal_recovery_dataset,
    synthetic_logistic_dataset,
)
from .driver import DriverConfig, run_active_solver, support
from .kkt import kkt_residual
from .problem import KIND_LOGISTIC, KIND_LS, ProblemInstance, smooth_value
from .solvers import SolveReport, SolverConfig, solve, tier_config


def validation_mse(x, val: Dataset) -> float:
    """(1/n) ||A_val x - b_val||^2."""
    r = val.design @ x - val.response
    return float(r @ r) / val.n_rows


def grad0_sup_norm(ds: Dataset, kind: str = KIND_LS) -> float:
    """||grad f(0)||_inf, the level above which the penalty zeroes everything."""
    if kind == KIND_LS:
        g = ds.design.T @ ds.response
    else:
        g = ds.design.T @ (0.5 - ds.response) / ds.n_rows
    return float(np.abs(g).max())


def support_f1(x, truth, eps_rel: float = 1e-10) -> float:
    """F1 overlap between the thresholded support of x and the true support."""
    pred = set(support(x, eps_rel).tolist())
    true = set(np.flatnonzero(truth).tolist())
    denom = len(pred) + len(true)
    if denom == 0:
        return 1.0
    return 2.0 * len(pred & true) / denom


def _fit(inst: ProblemInstance, solver_kind: str, hybrid: bool,
         driver_cfg: DriverConfig | None = None,
         plain_cfg: SolverConfig | None = None):
    """One fit, hybrid or plain; returns (SolveReport, trace-or-None)."""
    if hybrid:
        return run_active_solver(inst, solver_kind, driver_cfg)
    cfg = plain_cfg or tier_config(solver_kind, "tight")
    rep = solve(inst, np.empty(0, dtype=np.int64), np.zeros(inst.n_cols), cfg)
    return rep, None


@dataclass
class EtaSelection:
    """Grid, per-candidate validation metric, and the winning penalty level."""

    candidates: np.ndarray
    metrics: np.ndarray
    chosen: float


def _val_metric(x, val: Dataset, kind: str) -> float:
    if kind == KIND_LS:
        return validation_mse(x, val)
    vinst = ProblemInstance(val.design, val.response, kind=KIND_LOGISTIC, eta=1.0)
    return smooth_value(vinst, x)


def select_eta(
    train: Dataset,
    val: Dataset,
    candidates,
    solver_kind: str = "cd",
    hybrid: bool = False,
    kind: str = KIND_LS,
    driver_cfg: DriverConfig | None = None,
) -> EtaSelection:
    """Fit each candidate penalty on the training split, keep the argmin.

    The metric is validation MSE for regression and mean validation
    negative log-likelihood for the logistic kind.  Failed fits mark the
    candidate invalid (NaN); ties go to the larger penalty.
    """
    candidates = np.asarray(candidates, dtype=float)
    if candidates.size == 0:
        raise ValueError("candidate grid is empty")
    metrics = np.full(candidates.size, np.nan)
    for i, eta in enumerate(candidates):
        try:
            inst = ProblemInstance(train.design, train.response, kind=kind, eta=float(eta))
            rep, _ = _fit(inst, solver_kind, hybrid, driver_cfg)
            metrics[i] = _val_metric(rep.x, val, kind)
        except Exception:
            continue
    if np.all(np.isnan(metrics)):
        raise RuntimeError("every candidate fit failed")
    best = np.nanmin(metrics)
    chosen = float(candidates[metrics == best].max())
    return EtaSelection(candidates=candidates, metrics=metrics, chosen=chosen)


def kfold_cv(
    dataset: Dataset,
    k: int,
    candidates,
    solver_kind: str = "cd",
    kind: str = KIND_LS,
    hybrid: bool = False,
    seed: int = 0,
    driver_cfg: DriverConfig | None = None,
) -> EtaSelection:
    """k-fold selection: seeded permutation, contiguous blocks as folds.

    The per-candidate metric is the mean validation MSE (regression) or
    mean validation negative log-likelihood (logistic) across folds.
    """
    n = dataset.n_rows
    if k < 2:
        raise ValueError("need at least 2 folds")
    if n < k:
        raise ValueError("need at least one row per fold")
    candidates = np.asarray(candidates, dtype=float)
    if candidates.size == 0:
        raise ValueError("candidate grid is empty")
    perm = np.random.default_rng(seed).permutation(n)
    folds = np.array_split(perm, k)
    metrics = np.full(candidates.size, np.nan)
    for i, eta in enumerate(candidates):
        fold_scores = []
        try:
            for fold in folds:
                mask = np.ones(n, dtype=bool)
                mask[fold] = False
                train = Dataset(dataset.design[mask], dataset.response[mask], None, dataset.seed)
                val = Dataset(dataset.design[fold], dataset.response[fold], None, dataset.seed)
                inst = ProblemInstance(train.design, train.response, kind=kind, eta=float(eta))
                rep, _ = _fit(inst, solver_kind, hybrid, driver_cfg)
                fold_scores.append(_val_metric(rep.x, val, kind))
            metrics[i] = float(np.mean(fold_scores))
        except Exception:
            continue
    if np.all(np.isnan(metrics)):
        raise RuntimeError("every candidate fit failed")
    best = np.nanmin(metrics)
    chosen = float(candidates[metrics == best].max())
    return EtaSelection(candidates=candidates, metrics=metrics, chosen=chosen)


@dataclass
class BenchRecord:
    """One benchmark row; ``trial`` is an index or "mean" for aggregates."""

    experiment: str
    trial: int | str
    generator: str
    params: dict
    solver: str
    hybrid: bool
    eta: float
    seed: int
    wall_time: float
    objective: float
    kkt_residual: float
    outer_iterations: int | None
    support_size: int | None
    support_f1: float | None
    status: str
    error: str | None = None


_GENERATORS = {
    "gaussian_ensemble": (
        lambda p, seed: signal_recovery_dataset(
            "gaussian", p["k"], p["n"], p["s"], p.get("noise_variance", 1e-4), seed
        ),
        KIND_LS,
    ),
    "binary_ensemble": (
        lambda p, seed: signal_recovery_dataset(
            "binary", p["k"], p["n"], p["s"], p.get("noise_variance", 1e-4), seed
        ),
        KIND_LS,
    ),
    "noisy_regression": (
        lambda p, seed: noisy_regression_dataset(p["n"], p["d"], p["s"], seed),
        KIND_LS,
    ),
    "correlated": (
        lambda p, seed: correlated_dataset(p["n"], p["d"], p["rho"], seed),
        KIND_LS,
    ),
    "logistic": (
        lambda p, seed: synthetic_logistic_dataset(p["n"], p["d"], p["s"], seed),
        KIND_LOGISTIC,
    ),
}


def bench_run(spec: dict) -> list[BenchRecord]:
    """Run the (generator, solver, hybrid?) grid for the requested trials.

    Each trial generates one dataset from ``master_seed + trial`` and runs
    every solver/hybrid combination on that same instance.  Failures are
    recorded per row and the run continues.  Per-trial rows are followed by
    one "mean" row per combination, averaged over its successful trials.
    """
    for key in ("generator", "params", "trials", "solvers", "master_seed"):
        if key not in spec:
            raise ValueError(f"experiment spec is missing {key!r}")
    name = spec["generator"]
    if name not in _GENERATORS:
        raise ValueError(f"unknown generator {name!r}")
    build, kind = _GENERATORS[name]
    exp_id = spec.get("id", name)
    params = dict(spec["params"])
    hybrid_flags = [bool(h) for h in spec.get("hybrid", [False, True])]
    eta_fixed = spec.get("eta")
    eta_scale = spec.get("eta_scale", 0.1)
    driver_cfg = DriverConfig(**spec.get("driver", {}))
    records: list[BenchRecord] = []

    for trial in range(int(spec["trials"])):
        seed = int(spec["master_seed"]) + trial
        ds = build(params, seed)
        eta = float(eta_fixed) if eta_fixed is not None else eta_scale * grad0_sup_norm(ds, kind)
        inst = ProblemInstance(ds.design, ds.response, kind=kind, eta=eta)
        for solver_kind in spec["solvers"]:
            for hybrid in hybrid_flags:
                base = dict(
                    experiment=exp_id, trial=trial, generator=name, params=params,
                    solver=solver_kind, hybrid=hybrid, eta=eta, seed=seed,
                )
                try:
                    t0 = time.perf_counter()
                    rep, trace = _fit(inst, solver_kind, hybrid, driver_cfg)
                    wall = time.perf_counter() - t0
                    records.append(BenchRecord(
                        **base,
                        wall_time=wall,
                        objective=rep.objective,
                        kkt_residual=kkt_residual(inst, rep.x),
                        outer_iterations=trace.outer_iterations if trace else None,
                        support_size=int(support(rep.x).size),
                        support_f1=(support_f1(rep.x, ds.ground_truth)
                                    if ds.ground_truth is not None else None),
                        status=rep.status,
                    ))
                except Exception as exc:
                    records.append(BenchRecord(
                        **base,
                        wall_time=float("nan"), objective=float("nan"),
                        kkt_residual=float("nan"), outer_iterations=None,
                        support_size=None, support_f1=None,
                        status="error", error=f"{type(exc).__name__}: {exc}",
                    ))

    for solver_kind in spec["solvers"]:
        for hybrid in hybrid_flags:
            group = [r for r in records
                     if r.solver == solver_kind and r.hybrid == hybrid and r.status != "error"]
            if not group:
                continue
            mean = lambda vals: float(np.mean([v for v in vals if v is not None]))
            has = lambda attr: any(getattr(r, attr) is not None for r in group)
            records.append(BenchRecord(
                experiment=exp_id, trial="mean", generator=name, params=params,
                solver=solver_kind, hybrid=hybrid,
                eta=mean([r.eta for r in group]),
                seed=int(spec["master_seed"]),
                wall_time=mean([r.wall_time for r in group]),
                objective=mean([r.objective for r in group]),
                kkt_residual=mean([r.kkt_residual for r in group]),
                outer_iterations=None,
                support_size=None,
                support_f1=mean([r.support_f1 for r in group]) if has("support_f1") else None,
                status="ok",
            ))
    return records


CSV_HEADER = [
    "experiment", "trial", "generator", "params", "solver", "hybrid", "eta",
    "seed", "wall_time", "objective", "kkt_residual", "outer_iterations",
    "support_size", "support_f1", "status", "error",
]


def _record_row(r: BenchRecord) -> list:
    d = asdict(r)
    d["params"] = json.dumps(d["params"], sort_keys=True)
    return [d[k] if d[k] is not None else "" for k in CSV_HEADER]


def write_records_csv(records, dest) -> None:
    """Write records as CSV with the fixed documented header."""
    own = isinstance(dest, (str, bytes)) or hasattr(dest, "__fspath__")
    fh = open(dest, "w", newline="") if own else dest
    try:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in records:
            writer.writerow(_record_row(r))
    finally:
        if own:
            fh.close()


def write_records_jsonl(records, dest) -> None:
    """Write records as JSON lines."""
    own = isinstance(dest, (str, bytes)) or hasattr(dest, "__fspath__")
    fh = open(dest, "w") if own else dest
    try:
        for r in records:
            fh.write(json.dumps(asdict(r)) + "\n")
    finally:
        if own:
            fh.close()


def records_to_csv_text(records) -> str:
    buf = io.StringIO()
    write_records_csv(records, buf)
    return buf.getvalue()
