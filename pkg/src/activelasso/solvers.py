"""Inner solvers for the L1-penalized problem, plus the pinned-set dispatcher.

Three interchangeable solvers minimize f(x) + sum_j w_j |x_j|:

* ``gpsr_bb_solve``  - projected gradient on the split x = u - v with
  Barzilai-Borwein step lengths (either objective kind);
* ``admm_lasso_solve`` - ADMM splitting with a cached factorization
  (least-squares kind only);
* ``cd_lasso_solve`` / ``cd_logistic_solve`` - cyclic coordinate descent,
  wrapped in an IRLS loop for the logistic kind.

Each solver has its own tolerance semantics, chosen to mirror the stopping
rule of its reference implementation:

* gpsr: relative change of the split objective between consecutive
  iterations falls below ``tol``;
* admm: primal and dual residual norms fall below
  sqrt(p)*tol + tol*scale (ABSTOL = RELTOL = tol);
* cd: the largest weighted squared coordinate move over a full sweep,
  max_j ||a_j||^2 dx_j^2, falls below ``tol`` times the null objective
  scale ||b||^2 (thresh-style relative criterion).

Measured on random dense instances at eta = 0.1 ||A^T b||_inf, a converged
solve satisfies kkt_residual <= c * tol * eta with c ~ 1e4 (gpsr), ~1e3
(admm), and ~1e4 (cd); the package-wide tight tiers in ``driver`` are set
so that c * tol stays safely below 1e-4.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from numba import njit
from scipy.special import expit

from .problem import (
    KIND_LOGISTIC,
    KIND_LS,
    ProblemInstance,
    _as_model_vector,
    embed,
    full_objective,
    restrict,
    smooth_value,
    soft_threshold,
    value_and_gradient,
)

GPSR_BB = "gpsr"
ADMM = "admm"
COORDINATE_DESCENT = "cd"

SOLVER_KINDS = (GPSR_BB, ADMM, COORDINATE_DESCENT)

STATUS_CONVERGED = "converged"
STATUS_MAX_ITER = "max_iter"

# (loose, tight) tolerance per solver kind.  Loose values follow each
# reference implementation's relaxed setting; tight values are calibrated
# so a converged tight solve lands at kkt_residual <= 1e-4 * eta on the
# instance families exercised by the test suite.
TOLERANCE_TIERS = {
    GPSR_BB: (1e-3, 1e-12),
    ADMM: (1e-4, 1e-9),
    COORDINATE_DESCENT: (1e-5, 1e-13),
}

# tight-tier CD additionally certifies per-coordinate optimality at this
# fraction of eta before declaring convergence
_CD_TIGHT_KKT_REL = 2e-5

# Barzilai-Borwein step safeguards
_ALPHA_MIN = 1e-30
_ALPHA_MAX = 1e30

# lower clamp on the IRLS curvature weights mu*(1-mu)
_IRLS_WEIGHT_FLOOR = 1e-5


class SolverDivergenceError(RuntimeError):
    """An iterate produced a non-finite objective or margin."""


@dataclass(frozen=True)
class SolverConfig:
    """Stopping parameters for one inner solver.

    ``tol`` follows the per-solver semantics described in the module
    docstring.  ``admm_rho`` is the ADMM coupling penalty; ``irls_outer_max``
    bounds the IRLS rounds of the logistic coordinate-descent solver.
    ``max_iter`` bounds iterations (gpsr), iterations (admm), or sweeps
    per call (cd).
    """

    kind: str = GPSR_BB
    tol: float = 1e-5
    max_iter: int = 100_000
    admm_rho: float = 1.0
    irls_outer_max: int = 100
    kkt_rel: float | None = None

    def __post_init__(self):
        if self.kind not in SOLVER_KINDS:
            raise ValueError(f"unknown solver kind {self.kind!r}")
        if not (self.tol > 0):
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not (self.admm_rho > 0):
            raise ValueError("admm_rho must be positive")
        if self.irls_outer_max < 1:
            raise ValueError("irls_outer_max must be at least 1")
        if self.kkt_rel is not None and not (self.kkt_rel > 0):
            raise ValueError("kkt_rel must be positive when set")


@dataclass(frozen=True)
class SolveReport:
    x: np.ndarray
    objective: float
    inner_iterations: int
    elapsed: float
    status: str


def _require_kind(cfg: SolverConfig, kind: str):
    if cfg.kind != kind:
        raise ValueError(f"config kind {cfg.kind!r} does not match solver {kind!r}")


def tier_config(kind: str, tier: str = "tight") -> SolverConfig:
    """The package-wide loose/tight default configuration for a solver."""
    loose, tight = TOLERANCE_TIERS[kind]
    if tier == "loose":
        return SolverConfig(kind=kind, tol=loose)
    if tier != "tight":
        raise ValueError("tier must be 'loose' or 'tight'")
    return SolverConfig(
        kind=kind,
        tol=tight,
        kkt_rel=_CD_TIGHT_KKT_REL if kind == COORDINATE_DESCENT else None,
    )


def gpsr_bb_solve(inst: ProblemInstance, x0, cfg: SolverConfig) -> SolveReport:
    """Projected-gradient solver on the nonnegative split x = u - v.

    Minimizes f(u - v) + w.(u + v) over u, v >= 0 by projecting the
    gradient step onto the orthant.  The step length is the
    Barzilai-Borwein quotient |d|^2 / d.(grad difference), clipped into
    [1e-30, 1e30]; steps are nonmonotone and the objective is tracked for
    termination only.  Stops once the relative change of the split
    objective between consecutive iterations falls below ``cfg.tol``, or
    when the projected step makes no move at all.
    """
    _require_kind(cfg, GPSR_BB)
    t0 = time.perf_counter()
    x = _as_model_vector(x0, inst.n_cols).copy()
    w = inst.penalty_weights()
    u = np.maximum(x, 0.0)
    v = np.maximum(-x, 0.0)
    fval, g = value_and_gradient(inst, x)
    fs = fval + w @ (u + v)
    alpha = 1.0
    status = STATUS_MAX_ITER
    it = 0
    for it in range(1, cfg.max_iter + 1):
        u1 = np.maximum(u - alpha * (g + w), 0.0)
        v1 = np.maximum(v - alpha * (w - g), 0.0)
        du = u1 - u
        dv = v1 - v
        dd = float(du @ du + dv @ dv)
        if dd == 0.0:
            status = STATUS_CONVERGED
            break
        x1 = u1 - v1
        f1, g1 = value_and_gradient(inst, x1)
        fs1 = f1 + w @ (u1 + v1)
        if not np.isfinite(fs1):
            raise SolverDivergenceError("gpsr objective became non-finite")
        dg = float((du - dv) @ (g1 - g))
        alpha = _ALPHA_MAX if dg <= 0 else min(max(dd / dg, _ALPHA_MIN), _ALPHA_MAX)
        rel = abs(fs - fs1) / max(abs(fs), 1e-30)
        u, v, x, g, fs = u1, v1, x1, g1, fs1
        if rel < cfg.tol:
            status = STATUS_CONVERGED
            break
    return SolveReport(
        x=x,
        objective=full_objective(inst, x),
        inner_iterations=it,
        elapsed=time.perf_counter() - t0,
        status=status,
    )


def admm_lasso_solve(inst: ProblemInstance, x0, cfg: SolverConfig) -> SolveReport:
    """ADMM splitting for 0.5 ||Ax - b||^2 + w.|z| with the coupling x = z.

    The x-update solves (A^T A + rho I) x = A^T b + rho (z - u) through a
    Cholesky factorization computed once per call; when n < p the
    factorization is taken of the smaller n x n system I + A A^T / rho
    instead.  z-update is the soft threshold at w/rho, u accumulates the
    constraint violation.  Stops when both residual norms fall below
    sqrt(p)*tol + tol*scale.  Returns the z iterate, which is exactly
    sparse.
    """
    _require_kind(cfg, ADMM)
    if inst.kind != KIND_LS:
        raise ValueError("the ADMM solver supports the least-squares kind only")
    t0 = time.perf_counter()
    A = inst.A
    b = inst.target
    n, p = A.shape
    rho = cfg.admm_rho
    shrink = inst.penalty_weights() / rho
    atb = A.T @ b

    if p <= n:
        cho = scipy.linalg.cho_factor(A.T @ A + rho * np.eye(p), lower=True)

        def solve_normal(q):
            return scipy.linalg.cho_solve(cho, q)

    else:
        # fat case: Woodbury identity against the n x n Gram factor
        cho = scipy.linalg.cho_factor(np.eye(n) + (A @ A.T) / rho, lower=True)

        def solve_normal(q):
            return q / rho - A.T @ scipy.linalg.cho_solve(cho, A @ q) / rho**2

    z = _as_model_vector(x0, p).copy()
    uu = np.zeros(p)
    sqp = np.sqrt(p)
    status = STATUS_MAX_ITER
    it = 0
    for it in range(1, cfg.max_iter + 1):
        xv = solve_normal(atb + rho * (z - uu))
        z_old = z
        z = soft_threshold(xv + uu, shrink)
        uu = uu + xv - z
        r_norm = np.linalg.norm(xv - z)
        s_norm = rho * np.linalg.norm(z - z_old)
        eps_pri = sqp * cfg.tol + cfg.tol * max(np.linalg.norm(xv), np.linalg.norm(z))
        eps_dual = sqp * cfg.tol + cfg.tol * rho * np.linalg.norm(uu)
        if r_norm <= eps_pri and s_norm <= eps_dual:
            status = STATUS_CONVERGED
            break
    return SolveReport(
        x=z,
        objective=full_objective(inst, z),
        inner_iterations=it,
        elapsed=time.perf_counter() - t0,
        status=status,
    )


@njit(cache=True)
def _cd_pass(A, r, x, roww, colw, thr, idx, in_set, weighted):
    """One cyclic pass over ``idx``, keeping the residual r current.

    Any coordinate that moves is marked in ``in_set``.  Returns the largest
    weighted squared move colw[j] * dx_j^2 together with the largest
    per-coordinate optimality violation seen at visiting time (from the
    partial inner product rho, so it costs nothing extra).  Columns with
    zero norm are skipped, freezing their coordinate.
    """
    max_d = 0.0
    max_v = 0.0
    n = r.shape[0]
    for t in range(idx.shape[0]):
        j = idx[t]
        wj = colw[j]
        if wj == 0.0:
            continue
        xj = x[j]
        rho = wj * xj
        if weighted:
            for i in range(n):
                rho += roww[i] * A[i, j] * r[i]
        else:
            for i in range(n):
                rho += A[i, j] * r[i]
        # grad_j = -(rho - wj*xj); violation before this coordinate moves
        if xj != 0.0:
            sgn = 1.0 if xj > 0.0 else -1.0
            viol = abs(wj * xj - rho + sgn * thr[j])
        else:
            viol = abs(rho) - thr[j]
            if viol < 0.0:
                viol = 0.0
        if viol > max_v:
            max_v = viol
        mag = abs(rho) - thr[j]
        if mag <= 0.0:
            zj = 0.0
        else:
            zj = mag / wj if rho > 0.0 else -mag / wj
        d = zj - xj
        if d != 0.0:
            x[j] = zj
            in_set[j] = True
            for i in range(n):
                r[i] -= A[i, j] * d
            dd = wj * d * d
            if dd > max_d:
                max_d = dd
    return max_d, max_v


@njit(cache=True)
def _cd_cycles(A, r, x, roww, colw, thr, tol_scaled, kkt_thr, max_sweeps, weighted):
    """Full sweeps interleaved with working-set sweeps until converged.

    Convergence is decided on full sweeps only: the solve stops when a pass
    over every coordinate moves nothing past the weighted threshold and,
    when ``kkt_thr`` is finite, leaves no per-coordinate violation above
    it.  Between full sweeps, passes restricted to the working set (every
    coordinate that has ever moved, plus the nonzeros of the start point)
    run until they settle, which is where the bulk of the progress happens
    on sparse problems.
    """
    p = x.shape[0]
    in_set = x != 0.0
    all_idx = np.arange(p)
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        max_d, max_v = _cd_pass(A, r, x, roww, colw, thr, all_idx, in_set, weighted)
        if max_d <= tol_scaled and max_v <= kkt_thr:
            return sweeps, True
        members = np.nonzero(in_set)[0]
        while sweeps < max_sweeps and members.shape[0] > 0:
            sweeps += 1
            max_d, _ = _cd_pass(A, r, x, roww, colw, thr, members, in_set, weighted)
            if max_d <= tol_scaled:
                break
    return sweeps, False


def cd_lasso_solve(inst: ProblemInstance, x0, cfg: SolverConfig) -> SolveReport:
    """Cyclic coordinate descent for the least-squares kind.

    Each update is x_j <- S(x_j + a_j.r / ||a_j||^2, w_j / ||a_j||^2) with
    the residual r = b - A x maintained incrementally.  Stops when the
    largest weighted squared move over a full sweep falls below
    ``cfg.tol * ||b||^2`` (and, when ``cfg.kkt_rel`` is set, the sweep also
    certifies every per-coordinate violation below ``kkt_rel * eta``; the
    move criterion alone can stall short of optimality on strongly
    correlated columns).
    """
    _require_kind(cfg, COORDINATE_DESCENT)
    if inst.kind != KIND_LS:
        raise ValueError("cd_lasso_solve handles the least-squares kind only")
    t0 = time.perf_counter()
    A = np.asfortranarray(inst.A)
    b = inst.target
    x = _as_model_vector(x0, inst.n_cols).copy()
    r = b - A @ x
    colw = np.einsum("ij,ij->j", A, A)
    thr = inst.penalty_weights()
    scale = float(b @ b)
    kkt_thr = np.inf if cfg.kkt_rel is None else cfg.kkt_rel * inst.eta
    sweeps, converged = _cd_cycles(
        A, r, x, np.empty(0), colw, thr, cfg.tol * scale, kkt_thr, cfg.max_iter, False
    )
    return SolveReport(
        x=x,
        objective=full_objective(inst, x),
        inner_iterations=int(sweeps),
        elapsed=time.perf_counter() - t0,
        status=STATUS_CONVERGED if converged else STATUS_MAX_ITER,
    )


def cd_logistic_solve(inst: ProblemInstance, x0, cfg: SolverConfig) -> SolveReport:
    """IRLS with a weighted coordinate-descent inner solve (logistic kind).

    Each outer round builds the local quadratic model of the mean negative
    log-likelihood at the current point: row weights mu_i (1 - mu_i)
    clamped below at 1e-5 and working response m_i + (y_i - mu_i)/w_i from
    the current margin m = A x.  The model plus the L1 term is minimized by
    cyclic weighted coordinate descent; a halving backtrack toward the
    previous point keeps F monotone.  Stops when the relative F decrease
    falls below ``cfg.tol`` or after ``cfg.irls_outer_max`` rounds.
    """
    _require_kind(cfg, COORDINATE_DESCENT)
    if inst.kind != KIND_LOGISTIC:
        raise ValueError("cd_logistic_solve handles the logistic kind only")
    t0 = time.perf_counter()
    A = np.asfortranarray(inst.A)
    y = inst.target
    n = inst.n_rows
    thr = inst.penalty_weights()
    x = _as_model_vector(x0, inst.n_cols).copy()
    fcur = full_objective(inst, x)
    sweeps_total = 0
    status = STATUS_MAX_ITER
    for _ in range(cfg.irls_outer_max):
        m = A @ x
        if not np.all(np.isfinite(m)):
            raise SolverDivergenceError("logistic margin became non-finite")
        mu = expit(m)
        wrow = np.maximum(mu * (1.0 - mu), _IRLS_WEIGHT_FLOOR)
        work = m + (y - mu) / wrow
        roww = wrow / n
        colw = np.einsum("i,ij,ij->j", roww, A, A)
        xw = x.copy()
        r = work - A @ xw
        scale = float(roww @ (work * work))
        kkt_thr = np.inf if cfg.kkt_rel is None else cfg.kkt_rel * inst.eta
        sweeps, _ = _cd_cycles(
            A, r, xw, roww, colw, thr, cfg.tol * scale, kkt_thr, cfg.max_iter, True
        )
        sweeps_total += int(sweeps)
        fnew = full_objective(inst, xw)
        step = 1.0
        while fnew > fcur and step > 1e-12:
            step *= 0.5
            xw = x + step * (xw - x)
            fnew = full_objective(inst, xw)
        if fnew > fcur:
            status = STATUS_CONVERGED
            break
        drop = fcur - fnew
        x, fcur = xw, fnew
        if drop <= cfg.tol * max(abs(fcur), 1e-30):
            status = STATUS_CONVERGED
            break
    return SolveReport(
        x=x,
        objective=fcur,
        inner_iterations=sweeps_total,
        elapsed=time.perf_counter() - t0,
        status=status,
    )


def _dispatch(inst: ProblemInstance, x0, cfg: SolverConfig) -> SolveReport:
    if cfg.kind == GPSR_BB:
        return gpsr_bb_solve(inst, x0, cfg)
    if cfg.kind == ADMM:
        return admm_lasso_solve(inst, x0, cfg)
    if inst.kind == KIND_LS:
        return cd_lasso_solve(inst, x0, cfg)
    return cd_logistic_solve(inst, x0, cfg)


def solve(inst: ProblemInstance, active, x0, cfg: SolverConfig) -> SolveReport:
    """Solve with the coordinates in ``active`` pinned at zero.

    Restricts the instance to the complement of the active set, dispatches
    on ``cfg.kind``, and embeds the result; the returned x is exactly zero
    on the active set.  ``x0`` must already be zero there.  Pinning every
    coordinate is legal and returns the zero vector without running a
    solver.
    """
    p = inst.n_cols
    active = np.asarray(active, dtype=np.int64).ravel()
    x0 = _as_model_vector(x0, p)
    if np.any(x0[active] != 0.0):
        raise ValueError("start point is nonzero on the active set")
    free = np.setdiff1d(np.arange(p), active)
    if free.size == 0:
        z = np.zeros(p)
        return SolveReport(
            x=z,
            objective=smooth_value(inst, z),
            inner_iterations=0,
            elapsed=0.0,
            status=STATUS_CONVERGED,
        )
    sub = restrict(inst, free)
    rep = _dispatch(sub, x0[free], cfg)
    x = embed(rep.x, free, p)
    return SolveReport(
        x=x,
        objective=full_objective(inst, x),
        inner_iterations=rep.inner_iterations,
        elapsed=rep.elapsed,
        status=rep.status,
    )
