"""Optimality diagnostics for the non-smooth objective f(x) + eta ||x||_1.

The subdifferential of the penalty is an interval per coordinate, so the
subdifferential of F at a point is a box: a degenerate one-point interval
g_i + eta * sign(x_i) where x_i != 0, and [g_i - eta, g_i + eta] where
x_i = 0 (g = grad f).  A point is globally optimal iff the box contains
the zero vector, which is what ``kkt_residual`` measures; a pinned-at-zero
coordinate j is worth releasing iff |g_j| > eta, which is what
``eligibility`` reports.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problem import ProblemInstance, _as_model_vector, smooth_gradient


@dataclass(frozen=True)
class SubgradientBox:
    """Per-coordinate interval [lo_i, hi_i] of admissible subgradients."""

    lo: np.ndarray
    hi: np.ndarray


@dataclass(frozen=True)
class EligibilityReport:
    """Pinned coordinates whose smooth gradient exceeds the penalty level.

    Sorted by gradient magnitude descending; equal magnitudes are ordered
    by ascending index.
    """

    indices: np.ndarray
    magnitudes: np.ndarray

    def __len__(self) -> int:
        return int(self.indices.size)


def subgradient_box(inst: ProblemInstance, x) -> SubgradientBox:
    x = _as_model_vector(x, inst.n_cols)
    g = smooth_gradient(inst, x)
    w = inst.penalty_weights()
    lo = g + w * np.where(x > 0, 1.0, -1.0)
    hi = g + w * np.where(x < 0, -1.0, 1.0)
    return SubgradientBox(lo=lo, hi=hi)


def eligibility(inst: ProblemInstance, x, active, slack: float = 1e-8) -> EligibilityReport:
    """Sorted report of active (pinned) coordinates j with |g_j| > eta*(1+slack).

    ``x`` must be exactly zero on the active set.  The multiplicative slack
    absorbs gradient noise left by inexact inner solves at the eta boundary;
    releasing any reported coordinate strictly decreases the optimum.
    """
    if slack < 0:
        raise ValueError("slack must be nonnegative")
    x = _as_model_vector(x, inst.n_cols)
    active = np.asarray(active, dtype=np.int64).ravel()
    if np.any(x[active] != 0.0):
        raise ValueError("point is nonzero on the active set")
    g = smooth_gradient(inst, x)
    mags = np.abs(g[active])
    keep = mags > inst.penalty_weights()[active] * (1.0 + slack)
    idx = active[keep]
    mags = mags[keep]
    order = np.lexsort((idx, -mags))
    return EligibilityReport(indices=idx[order], magnitudes=mags[order])


def kkt_residual(inst: ProblemInstance, x) -> float:
    """Largest per-coordinate violation of the global optimality conditions.

    For x_i != 0 this is |g_i + sign(x_i) * eta|; for x_i = 0 it is
    max(|g_i| - eta, 0).  Zero exactly at a global optimum.
    """
    x = _as_model_vector(x, inst.n_cols)
    g = smooth_gradient(inst, x)
    w = inst.penalty_weights()
    res = np.where(
        x != 0.0,
        np.abs(g + np.sign(x) * w),
        np.maximum(np.abs(g) - w, 0.0),
    )
    return float(res.max()) if res.size else 0.0


def is_optimal(inst: ProblemInstance, x, tol: float) -> bool:
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    return kkt_residual(inst, x) <= tol
