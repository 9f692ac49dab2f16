"""Problem containers and objective evaluation for L1-penalized regression.

The objective throughout the package is

    F(x) = f(x) + eta * ||x||_1

where the smooth part f is either

    0.5 * ||A x - b||^2                                       ("ls")
    -(1/n) sum_i [y_i log mu_i + (1-y_i) log(1-mu_i)]         ("logistic")

with mu_i = 1 / (1 + exp(-a_i . x)).  Instances are immutable and safe to
share between threads; every operation here is a pure function.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

KIND_LS = "ls"
KIND_LOGISTIC = "logistic"

_KINDS = (KIND_LS, KIND_LOGISTIC)


@dataclass(frozen=True)
class ProblemInstance:
    """One L1-penalized problem: min_x f(x) + eta * ||x||_1.

    ``A`` is the dense (n, p) design matrix, ``target`` the response vector
    (real for "ls", 0/1 labels for "logistic").  ``unpenalized_col``
    optionally exempts one column (e.g. an intercept column of ones) from
    the penalty; by default every column is penalized.
    """

    A: np.ndarray
    target: np.ndarray
    kind: str = KIND_LS
    eta: float = 1.0
    unpenalized_col: int | None = None

    def __post_init__(self):
        A = np.ascontiguousarray(np.asarray(self.A, dtype=float))
        t = np.asarray(self.target, dtype=float).ravel()
        if A.ndim != 2 or A.shape[0] < 1:
            raise ValueError("design matrix must be 2-D with at least one row")
        if not np.all(np.isfinite(A)):
            raise ValueError("design matrix contains non-finite entries")
        if t.shape[0] != A.shape[0]:
            raise ValueError(f"target length {t.shape[0]} != row count {A.shape[0]}")
        if not np.all(np.isfinite(t)):
            raise ValueError("target contains non-finite entries")
        if self.kind not in _KINDS:
            raise ValueError(f"unknown objective kind {self.kind!r}")
        if self.kind == KIND_LOGISTIC and not np.all((t == 0.0) | (t == 1.0)):
            raise ValueError("logistic targets must be 0 or 1")
        if not (self.eta > 0):
            raise ValueError("eta must be positive")
        if self.unpenalized_col is not None and not (0 <= self.unpenalized_col < A.shape[1]):
            raise ValueError("unpenalized_col out of range")
        A.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "target", t)

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    @property
    def n_cols(self) -> int:
        return self.A.shape[1]

    def penalty_weights(self) -> np.ndarray:
        """Per-column penalty weight: eta everywhere, 0 on the exempt column."""
        w = np.full(self.n_cols, float(self.eta))
        if self.unpenalized_col is not None:
            w[self.unpenalized_col] = 0.0
        return w


def _as_model_vector(x, n_cols: int) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != n_cols:
        raise ValueError(f"model vector length {x.shape[0]} != column count {n_cols}")
    return x


def smooth_value(inst: ProblemInstance, x) -> float:
    """The smooth loss f(x), without the penalty."""
    x = _as_model_vector(x, inst.n_cols)
    if inst.kind == KIND_LS:
        r = inst.A @ x - inst.target
        return 0.5 * float(r @ r)
    # log(1 + exp(m)) - y*m via logaddexp stays finite for any float margin
    m = inst.A @ x
    return float(np.mean(np.logaddexp(0.0, m) - inst.target * m))


def smooth_gradient(inst: ProblemInstance, x) -> np.ndarray:
    """Gradient of the smooth loss: A^T(Ax - b), or (1/n) A^T(mu - y)."""
    x = _as_model_vector(x, inst.n_cols)
    if inst.kind == KIND_LS:
        return inst.A.T @ (inst.A @ x - inst.target)
    mu = expit(inst.A @ x)
    return inst.A.T @ (mu - inst.target) / inst.n_rows


def value_and_gradient(inst: ProblemInstance, x) -> tuple[float, np.ndarray]:
    """Smooth loss and its gradient in one pass (shares the A @ x product)."""
    x = _as_model_vector(x, inst.n_cols)
    if inst.kind == KIND_LS:
        r = inst.A @ x - inst.target
        return 0.5 * float(r @ r), inst.A.T @ r
    m = inst.A @ x
    mu = expit(m)
    val = float(np.mean(np.logaddexp(0.0, m) - inst.target * m))
    return val, inst.A.T @ (mu - inst.target) / inst.n_rows


def full_objective(inst: ProblemInstance, x) -> float:
    """F(x) = f(x) + sum_j w_j |x_j| with w_j the per-column penalty weight."""
    x = _as_model_vector(x, inst.n_cols)
    return smooth_value(inst, x) + float(inst.penalty_weights() @ np.abs(x))


def soft_threshold(z, t):
    """sign(z) * max(|z| - t, 0); the minimizer of 0.5 (x - z)^2 + t |x|.

    Accepts scalars or arrays (broadcast in either argument); t must be >= 0.
    """
    t = np.asarray(t)
    if np.any(t < 0):
        raise ValueError("threshold must be nonnegative")
    z = np.asarray(z)
    out = np.sign(z) * np.maximum(np.abs(z) - t, 0.0)
    return float(out) if out.ndim == 0 else out


def _as_free_indices(free, n_cols: int) -> np.ndarray:
    free = np.asarray(free, dtype=np.int64).ravel()
    if free.size:
        if np.any(free < 0) or np.any(free >= n_cols):
            raise IndexError("free index out of range")
        if np.any(np.diff(free) <= 0):
            raise ValueError("free indices must be strictly increasing and distinct")
    return free


def restrict(inst: ProblemInstance, free) -> ProblemInstance:
    """The same problem over the listed columns only; all others pinned at zero.

    Solving the restricted instance and embedding the result is equivalent to
    solving the original problem subject to x_i = 0 off the free list.  An
    empty free list is legal and yields the zero-variable problem whose
    optimal value is f(0).
    """
    free = _as_free_indices(free, inst.n_cols)
    unpen = None
    if inst.unpenalized_col is not None:
        pos = np.searchsorted(free, inst.unpenalized_col)
        if pos < free.size and free[pos] == inst.unpenalized_col:
            unpen = int(pos)
    return ProblemInstance(
        A=inst.A[:, free],
        target=inst.target,
        kind=inst.kind,
        eta=inst.eta,
        unpenalized_col=unpen,
    )


def embed(x_free, free, n_cols: int) -> np.ndarray:
    """Scatter a restricted solution back to full length, zeros elsewhere."""
    free = _as_free_indices(free, n_cols)
    x_free = np.asarray(x_free, dtype=float).ravel()
    if x_free.shape[0] != free.shape[0]:
        raise ValueError("restricted vector length does not match the free list")
    out = np.zeros(n_cols)
    out[free] = x_free
    return out
