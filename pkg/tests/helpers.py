"""Shared builders for the test suite."""

import numpy as np

from activelasso import ProblemInstance


def random_ls_instance(rng, n=100, p=400, eta_scale=0.1):
    """Dense standard-normal instance with eta tied to ||A^T b||_inf."""
    A = rng.standard_normal((n, p))
    b = rng.standard_normal(n)
    eta = eta_scale * float(np.abs(A.T @ b).max())
    return ProblemInstance(A, b, kind="ls", eta=eta)


def random_logistic_instance(rng, n=40, p=15, eta_scale=0.1, lo=-2.0, hi=2.0):
    """Small logistic instance with entries in [lo, hi] and balanced-ish labels."""
    A = rng.uniform(lo, hi, size=(n, p))
    y = (rng.random(n) < 0.5).astype(float)
    g0 = np.abs(A.T @ (0.5 - y)).max() / n
    eta = eta_scale * float(g0) if g0 > 0 else eta_scale
    return ProblemInstance(A, y, kind="logistic", eta=eta)


def orthonormal_square_instance(rng, p, eta_scale=0.3):
    """Square orthonormal design: the optimum is the soft threshold of A^T b."""
    q, _ = np.linalg.qr(rng.standard_normal((p, p)))
    b = rng.standard_normal(p)
    eta = eta_scale * float(np.abs(q.T @ b).max())
    return ProblemInstance(q, b, kind="ls", eta=eta)
