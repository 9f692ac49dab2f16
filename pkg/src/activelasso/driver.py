"""The accelerating outer loop: pin, release the best few, re-solve.

``run_active_solver`` keeps an active set of coordinates pinned at zero and
repeatedly calls an inner solver on the small free remainder.  After each
solve it scores every pinned coordinate by its smooth-gradient magnitude
and releases the ``tau`` largest ones above the penalty level (all of them
when few remain or after ``beta1`` rounds, which guarantees termination).
Intermediate solves run at a loose tolerance; one extra solve at the tight
tolerance on the final free set polishes the answer.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .kkt import EligibilityReport, eligibility
from .problem import ProblemInstance
from .solvers import (
    GPSR_BB,
    STATUS_CONVERGED,
    STATUS_MAX_ITER,
    TOLERANCE_TIERS,
    SolveReport,
    SolverConfig,
    solve,
    tier_config,
)


def tau_default(n_cols: int) -> int:
    """Default release budget per round: floor(4 ln^2 p), at least 1."""
    if n_cols < 2:
        raise ValueError("need at least two columns")
    return max(1, math.floor(4.0 * math.log(n_cols) ** 2))


def support(x, eps_rel: float = 1e-10) -> np.ndarray:
    """Indices with |x_i| > eps_rel * max(1, ||x||_inf).

    The relative threshold absorbs the numerically tiny nonzeros that
    inner solvers leave behind; exact-zero support would leak them into
    the free set.
    """
    if eps_rel < 0:
        raise ValueError("eps_rel must be nonnegative")
    x = np.asarray(x, dtype=float).ravel()
    top = float(np.max(np.abs(x))) if x.size else 0.0
    return np.flatnonzero(np.abs(x) > eps_rel * max(1.0, top))


@dataclass(frozen=True)
class DriverConfig:
    """Outer-loop parameters.

    ``tau`` defaults to floor(4 ln^2 p) and ``beta0`` to 3*tau at run time.
    While at least ``beta0`` coordinates are releasable and no more than
    ``beta1`` rounds have run, only the top ``tau`` are released; otherwise
    all of them are (the fail-safe that forces termination).  ``loose`` and
    ``tight`` default to the per-solver tiers in ``TOLERANCE_TIERS``.
    """

    tau: int | None = None
    beta0: int | None = None
    beta1: int = 15
    loose: SolverConfig | None = None
    tight: SolverConfig | None = None
    slack: float = 1e-8
    support_eps: float = 1e-10
    warm_start: bool = False
    outer_cap: int = 100

    def __post_init__(self):
        if self.tau is not None and self.tau < 1:
            raise ValueError("tau must be at least 1")
        if self.beta0 is not None:
            if self.tau is None:
                raise ValueError("beta0 requires an explicit tau")
            if self.beta0 < self.tau:
                raise ValueError("beta0 must be at least tau")
        if self.beta1 < 1:
            raise ValueError("beta1 must be at least 1")
        if self.outer_cap < self.beta1:
            raise ValueError("outer_cap must be at least beta1")
        if self.slack < 0 or self.support_eps < 0:
            raise ValueError("slack and support_eps must be nonnegative")

    def resolved(self, n_cols: int, solver_kind: str) -> "DriverConfig":
        """Fill in the per-instance defaults."""
        tau = self.tau if self.tau is not None else tau_default(n_cols)
        beta0 = self.beta0 if self.beta0 is not None else 3 * tau
        loose = self.loose if self.loose is not None else tier_config(solver_kind, "loose")
        tight = self.tight if self.tight is not None else tier_config(solver_kind, "tight")
        return replace(self, tau=tau, beta0=beta0, loose=loose, tight=tight)


@dataclass(frozen=True)
class TraceRow:
    """One outer round: set sizes, branch taken, and solve accounting.

    ``extra`` marks the final tight-tolerance polish, which releases
    nothing.
    """

    r: int
    active_size: int
    eligible: int
    freed: int
    support_size: int
    topk_branch: bool
    free_size: int
    objective: float
    inner_iterations: int
    elapsed: float
    extra: bool = False


@dataclass
class DriverTrace:
    rows: list[TraceRow] = field(default_factory=list)

    @property
    def outer_iterations(self) -> int:
        """Number of loose-tier rounds (the final polish not counted)."""
        return sum(1 for row in self.rows if not row.extra)

    def objectives(self) -> np.ndarray:
        return np.array([row.objective for row in self.rows])


def initial_active_set(inst: ProblemInstance) -> tuple[np.ndarray, np.ndarray]:
    """Start fully pinned: every coordinate active, x = 0.

    The all-pinned start is trivially optimal under its constraint, and the
    first eligibility scan then ranks coordinates by |grad f(0)| at the
    cost of a single matrix-vector product.
    """
    return np.arange(inst.n_cols, dtype=np.int64), np.zeros(inst.n_cols)


def update_active_set(
    active: np.ndarray,
    report: EligibilityReport,
    x: np.ndarray,
    r: int,
    cfg: DriverConfig,
) -> np.ndarray:
    """Next active set from the current eligibility report.

    Top-k branch (enough candidates, early round): keep free exactly the
    thresholded support of x plus the tau largest eligible coordinates.
    Otherwise release every eligible coordinate from the active set.
    """
    if len(report) == 0:
        raise ValueError("eligibility report is empty")
    x = np.asarray(x, dtype=float).ravel()
    p = x.size
    tau = cfg.tau if cfg.tau is not None else tau_default(p)
    beta0 = cfg.beta0 if cfg.beta0 is not None else 3 * tau
    if len(report) >= beta0 and r <= cfg.beta1:
        released = report.indices[:tau]
        keep_free = np.union1d(support(x, cfg.support_eps), released)
        return np.setdiff1d(np.arange(p, dtype=np.int64), keep_free)
    return np.setdiff1d(active, report.indices)


def run_active_solver(
    inst: ProblemInstance,
    solver_kind: str = GPSR_BB,
    cfg: DriverConfig | None = None,
) -> tuple[SolveReport, DriverTrace]:
    """Run the full active-set loop and the final tight polish.

    Intermediate solves use the loose tier and, by default, restart from
    zero on the free set; with ``cfg.warm_start`` they start from the
    previous solution instead.  When no pinned coordinate is releasable
    (or ``outer_cap`` rounds have run) one extra solve at the tight tier
    runs on the final free set, starting from the last loose solution.
    """
    cfg = (cfg or DriverConfig()).resolved(inst.n_cols, solver_kind)
    t0 = time.perf_counter()
    active, x = initial_active_set(inst)
    trace = DriverTrace()
    total_inner = 0
    hit_cap = False
    last_eligible = 0
    r = 1
    while True:
        report = eligibility(inst, x, active, cfg.slack)
        last_eligible = len(report)
        if len(report) == 0:
            break
        if r > cfg.outer_cap:
            hit_cap = True
            break
        topk = len(report) >= cfg.beta0 and r <= cfg.beta1
        new_active = update_active_set(active, report, x, r, cfg)
        if cfg.warm_start:
            x0 = x.copy()
            x0[new_active] = 0.0
        else:
            x0 = np.zeros(inst.n_cols)
        srep = solve(inst, new_active, x0, cfg.loose)
        total_inner += srep.inner_iterations
        trace.rows.append(
            TraceRow(
                r=r,
                active_size=int(active.size),
                eligible=len(report),
                freed=cfg.tau if topk else len(report),
                support_size=int(support(x, cfg.support_eps).size),
                topk_branch=topk,
                free_size=inst.n_cols - int(new_active.size),
                objective=srep.objective,
                inner_iterations=srep.inner_iterations,
                elapsed=srep.elapsed,
            )
        )
        x = srep.x
        active = new_active
        r += 1

    final = solve(inst, active, x, cfg.tight)
    total_inner += final.inner_iterations
    trace.rows.append(
        TraceRow(
            r=r,
            active_size=int(active.size),
            eligible=last_eligible,
            freed=0,
            support_size=int(support(final.x, cfg.support_eps).size),
            topk_branch=False,
            free_size=inst.n_cols - int(active.size),
            objective=final.objective,
            inner_iterations=final.inner_iterations,
            elapsed=final.elapsed,
            extra=True,
        )
    )
    status = STATUS_CONVERGED if (not hit_cap and final.status == STATUS_CONVERGED) else STATUS_MAX_ITER
    overall = SolveReport(
        x=final.x,
        objective=final.objective,
        inner_iterations=total_inner,
        elapsed=time.perf_counter() - t0,
        status=status,
    )
    return overall, trace
