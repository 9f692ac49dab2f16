"""Command-line surface: generate data, solve, benchmark, cross-validate.

Every subcommand prints machine-readable JSON on stdout and exits 0 on
success; failures print a JSON error object on stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .angles import (
    angle_boost,
    cap_probability_estimate,
    cap_probability_lower_bound,
    orthonormal_family_with_cosine,
)
from .bench import bench_run, grad0_sup_norm, write_records_csv, write_records_jsonl
from .datagen import (
    correlated_dataset,
    noisy_regression_dataset,
    signal_recovery_dataset,
    synthetic_logistic_dataset,
)
from .driver import DriverConfig, run_active_solver, support
from .kkt import kkt_residual
from .libsvm_io import read_libsvm, save_dataset
from .problem import KIND_LOGISTIC, KIND_LS, ProblemInstance
from .solvers import SolverConfig, solve, tier_config


def _cmd_gen(args) -> int:
    seed = args.seed
    if args.generator in ("gaussian-ensemble", "binary-ensemble"):
        if args.sparsity is None:
            raise ValueError("--sparsity is required for ensemble generators")
        ensemble = args.generator.split("-")[0]
        params = {
            "k": args.rows, "n": args.cols, "s": args.sparsity,
            "noise_variance": args.noise_variance,
        }
        ds = signal_recovery_dataset(
            ensemble, args.rows, args.cols, args.sparsity, args.noise_variance, seed
        )
    elif args.generator == "noisy-regression":
        if args.sparsity is None:
            raise ValueError("--sparsity is required for noisy-regression")
        params = {"n": args.rows, "d": args.cols, "s": args.sparsity}
        ds = noisy_regression_dataset(args.rows, args.cols, args.sparsity, seed)
    elif args.generator == "correlated":
        params = {"n": args.rows, "d": args.cols, "rho": args.rho}
        ds = correlated_dataset(args.rows, args.cols, args.rho, seed)
    else:  # logistic
        if args.sparsity is None:
            raise ValueError("--sparsity is required for logistic")
        params = {"n": args.rows, "d": args.cols, "s": args.sparsity}
        ds = synthetic_logistic_dataset(args.rows, args.cols, args.sparsity, seed)
    save_dataset(ds, args.output, generator=args.generator.replace("-", "_"), params=params)
    print(json.dumps({
        "output": args.output, "sidecar": f"{args.output}.json",
        "shape": [ds.n_rows, ds.n_cols], "seed": seed,
    }))
    return 0


def _driver_config(args) -> DriverConfig:
    loose = tight = None
    if args.tol_loose is not None:
        loose = SolverConfig(kind=args.solver, tol=args.tol_loose)
    if args.tol_tight is not None:
        tight = SolverConfig(kind=args.solver, tol=args.tol_tight)
    return DriverConfig(
        tau=args.tau, beta0=args.beta0, beta1=args.beta1, loose=loose, tight=tight
    )


def _cmd_solve(args) -> int:
    kind = KIND_LOGISTIC if args.task == "logistic" else KIND_LS
    ds = read_libsvm(args.data, classification=kind == KIND_LOGISTIC)
    eta = args.eta if args.eta is not None else args.eta_scale * grad0_sup_norm(ds, kind)
    inst = ProblemInstance(ds.design, ds.response, kind=kind, eta=eta)
    outer = None
    if args.hybrid:
        rep, trace = run_active_solver(inst, args.solver, _driver_config(args))
        outer = trace.outer_iterations
    else:
        if args.tol_tight is not None:
            cfg = SolverConfig(kind=args.solver, tol=args.tol_tight)
        else:
            cfg = tier_config(args.solver, "tight")
        rep = solve(inst, np.empty(0, dtype=np.int64), np.zeros(inst.n_cols), cfg)
    resid = kkt_residual(inst, rep.x)
    out = {
        "solver": args.solver, "hybrid": bool(args.hybrid), "task": args.task,
        "eta": eta, "objective": rep.objective, "kkt_residual": resid,
        "inner_iterations": rep.inner_iterations, "outer_iterations": outer,
        "elapsed": rep.elapsed, "status": rep.status,
        "support_size": int(support(rep.x).size), "seed": args.seed,
    }
    if args.output:
        nz = np.flatnonzero(rep.x)
        with open(args.output, "w") as fh:
            json.dump({
                "eta": eta, "task": args.task, "solver": args.solver,
                "hybrid": bool(args.hybrid), "n_cols": inst.n_cols,
                "objective": rep.objective, "kkt_residual": resid,
                "status": rep.status,
                "x": {"indices": nz.tolist(), "values": rep.x[nz].tolist()},
            }, fh, indent=2)
        out["solution"] = args.output
    print(json.dumps(out))
    return 0


def _cmd_bench(args) -> int:
    with open(args.spec) as fh:
        spec = json.load(fh)
    records = bench_run(spec)
    if args.csv:
        write_records_csv(records, args.csv)
    if args.jsonl:
        write_records_jsonl(records, args.jsonl)
    if not args.csv and not args.jsonl:
        write_records_csv(records, sys.stdout)
    else:
        print(json.dumps({"records": len(records), "csv": args.csv, "jsonl": args.jsonl}))
    return 0


def _cmd_cv(args) -> int:
    from .bench import kfold_cv

    kind = KIND_LOGISTIC if args.task == "logistic" else KIND_LS
    ds = read_libsvm(args.data, classification=kind == KIND_LOGISTIC)
    candidates = [float(tok) for tok in args.candidates.split(",") if tok]
    sel = kfold_cv(ds, args.folds, candidates, solver_kind=args.solver,
                   kind=kind, hybrid=args.hybrid, seed=args.seed)
    print(json.dumps({
        "candidates": sel.candidates.tolist(),
        "metrics": sel.metrics.tolist(),
        "chosen": sel.chosen,
    }))
    return 0


def _cmd_check_kkt(args) -> int:
    with open(args.solution) as fh:
        sol = json.load(fh)
    task = args.task or sol.get("task", "ls")
    kind = KIND_LOGISTIC if task == "logistic" else KIND_LS
    ds = read_libsvm(args.data, classification=kind == KIND_LOGISTIC)
    n_cols = max(sol.get("n_cols", ds.n_cols), ds.n_cols)
    design = ds.design
    if n_cols > ds.n_cols:
        pad = np.zeros((ds.n_rows, n_cols - ds.n_cols))
        design = np.hstack([design, pad])
    x = np.zeros(n_cols)
    x[np.asarray(sol["x"]["indices"], dtype=int)] = sol["x"]["values"]
    eta = args.eta if args.eta is not None else float(sol["eta"])
    inst = ProblemInstance(design, ds.response, kind=kind, eta=eta)
    resid = kkt_residual(inst, x)
    out = {"kkt_residual": resid, "eta": eta}
    if args.tol is not None:
        out["optimal"] = bool(resid <= args.tol)
    print(json.dumps(out))
    if args.tol is not None and resid > args.tol:
        return 3
    return 0


def _cmd_verify_angle(args) -> int:
    sizes = [int(tok) for tok in args.sizes.split(",") if tok]
    rows = []
    for p in sizes:
        cosine = args.cosine_frac / np.sqrt(p)
        fam = orthonormal_family_with_cosine(p, cosine)
        combined, coeffs = angle_boost(fam)
        achieved = float(combined @ fam.target)
        bound = (1.5 ** ((np.log2(p) - 1) / 2.0)) * cosine
        rows.append({
            "family_size": p, "base_cosine": cosine,
            "bound": bound, "achieved": achieved,
            "coeff_min": float(coeffs.min()),
        })
        print(f"size {p:4d}  base cos {cosine:.6f}  bound {bound:.6f}  "
              f"achieved {achieved:.6f}  {'OK' if achieved >= bound - 1e-9 else 'FAIL'}")
    caps = []
    dims = [int(tok) for tok in args.cap_dims.split(",") if tok]
    cs = [float(tok) for tok in args.cap_c.split(",") if tok]
    for s in dims:
        for c in cs:
            est = cap_probability_estimate(s, c, args.cap_samples, args.seed)
            floor = cap_probability_lower_bound(c)
            caps.append({"s": s, "c": c, "estimate": est, "lower_bound": floor})
            print(f"cap s={s:4d} c={c:<4g} estimate {est:.5f}  floor {floor:.5f}  "
                  f"{'OK' if est >= 0.95 * floor else 'FAIL'}")
    ok = all(r["achieved"] >= r["bound"] - 1e-9 for r in rows) and all(
        r["estimate"] >= 0.95 * r["lower_bound"] for r in caps
    )
    print(json.dumps({"boost": rows, "caps": caps, "ok": ok}))
    return 0 if ok else 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="activelasso",
        description="Active-set accelerated L1 solvers: data generation, solving, benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a dataset (LIBSVM file + JSON sidecar)")
    p.add_argument("generator", choices=[
        "gaussian-ensemble", "binary-ensemble", "noisy-regression", "correlated", "logistic",
    ])
    p.add_argument("output")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--sparsity", type=int)
    p.add_argument("--noise-variance", type=float, default=1e-4)
    p.add_argument("--rho", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("solve", help="solve one instance, plain or hybrid")
    p.add_argument("data")
    p.add_argument("--task", choices=["ls", "logistic"], default="ls")
    p.add_argument("--solver", choices=["gpsr", "admm", "cd"], default="gpsr")
    p.add_argument("--hybrid", action="store_true")
    p.add_argument("--eta", type=float)
    p.add_argument("--eta-scale", type=float, default=0.1,
                   help="eta = scale * ||grad f(0)||_inf when --eta is absent")
    p.add_argument("--tau", type=int)
    p.add_argument("--beta0", type=int)
    p.add_argument("--beta1", type=int, default=15)
    p.add_argument("--tol-loose", type=float)
    p.add_argument("--tol-tight", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", help="write the solution as JSON")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("bench", help="run an experiment spec, emit CSV/JSONL records")
    p.add_argument("spec")
    p.add_argument("--csv")
    p.add_argument("--jsonl")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("cv", help="k-fold cross-validated penalty selection")
    p.add_argument("data")
    p.add_argument("--task", choices=["ls", "logistic"], default="ls")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--candidates", required=True, help="comma-separated penalty levels")
    p.add_argument("--solver", choices=["gpsr", "admm", "cd"], default="cd")
    p.add_argument("--hybrid", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_cv)

    p = sub.add_parser("check-kkt", help="KKT residual of a stored solution")
    p.add_argument("data")
    p.add_argument("solution")
    p.add_argument("--task", choices=["ls", "logistic"])
    p.add_argument("--eta", type=float)
    p.add_argument("--tol", type=float, help="also report/enforce optimality at this tolerance")
    p.set_defaults(func=_cmd_check_kkt)

    p = sub.add_parser("verify-angle", help="direction-boost bound and cap-probability table")
    p.add_argument("--sizes", default="2,4,16,64")
    p.add_argument("--cosine-frac", type=float, default=0.8,
                   help="base cosine as a fraction of the feasible maximum 1/sqrt(p)")
    p.add_argument("--cap-dims", default="16,64,256")
    p.add_argument("--cap-c", default="1,2")
    p.add_argument("--cap-samples", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_verify_angle)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # argparse errors exit(2) before reaching here
        print(json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
