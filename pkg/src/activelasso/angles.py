"""Geometry behind releasing a batch of coordinates at once.

A conical combination of unit vectors that each point weakly toward a
target direction can point much more strongly toward it: combining a pair
as (q1 + q2)/sqrt(2) multiplies the cosine with the target by at least
sqrt(3/2) per pairing round, provided the family is well spread (every
vector keeps sine >= 1/(1+eps) against the span of any subset of the
others).  ``angle_boost`` performs the rounds; ``volume_condition`` checks
the spread; ``cap_probability_estimate`` measures how likely a uniformly
random direction lands within arccos(sqrt(c/s)) of a fixed axis, which is
bounded below by (1/4) (2e)^(-c/2).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

_UNIT_ATOL = 1e-12


@dataclass(frozen=True)
class VectorFamily:
    """A target unit vector plus the unit vectors to combine toward it."""

    target: np.ndarray
    vectors: np.ndarray  # (p, s), one unit vector per row

    def __post_init__(self):
        target = np.asarray(self.target, dtype=float).ravel()
        vectors = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        if vectors.shape[1] != target.shape[0]:
            raise ValueError("family vectors and target must share a dimension")
        if abs(np.linalg.norm(target) - 1.0) > _UNIT_ATOL:
            raise ValueError("target must be a unit vector")
        norms = np.linalg.norm(vectors, axis=1)
        if np.any(np.abs(norms - 1.0) > _UNIT_ATOL):
            raise ValueError("family vectors must be unit length")
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "vectors", vectors)

    @property
    def size(self) -> int:
        return self.vectors.shape[0]

    def cosines(self) -> np.ndarray:
        return self.vectors @ self.target


def pair_combine(q1, q2) -> np.ndarray:
    """Unit bisector of two unit vectors: (q1 + q2)/sqrt(2), renormalized.

    The sum form is already unit when q1 is orthogonal to q2; the
    renormalization covers every non-antipodal pair.
    """
    q1 = np.asarray(q1, dtype=float).ravel()
    q2 = np.asarray(q2, dtype=float).ravel()
    v = (q1 + q2) / np.sqrt(2.0)
    nv = np.linalg.norm(v)
    if nv < 1e-12:
        raise ValueError("cannot combine an antipodal pair")
    return v / nv


def angle_boost(fam: VectorFamily) -> tuple[np.ndarray, np.ndarray]:
    """Fold the family pairwise, (1,2),(3,4),..., until one vector remains.

    Only the largest power-of-two prefix takes part.  Returns the final
    unit vector together with its nonnegative coefficients over the
    original family (zeros for unused members); the coefficients
    reconstruct the output exactly up to rounding.
    """
    p = fam.size
    if p < 2:
        raise ValueError("need at least two vectors")
    m = 1 << (p.bit_length() - 1)
    if m > p:
        m >>= 1
    vecs = fam.vectors[:m].copy()
    coeffs = np.zeros((m, p))
    coeffs[:, :m] = np.eye(m)
    while vecs.shape[0] > 1:
        half = vecs.shape[0] // 2
        new_vecs = np.empty((half, vecs.shape[1]))
        new_coeffs = np.empty((half, p))
        for i in range(half):
            v = (vecs[2 * i] + vecs[2 * i + 1]) / np.sqrt(2.0)
            nv = np.linalg.norm(v)
            if nv < 1e-12:
                raise ValueError("cannot combine an antipodal pair")
            new_vecs[i] = v / nv
            new_coeffs[i] = (coeffs[2 * i] + coeffs[2 * i + 1]) / (np.sqrt(2.0) * nv)
        vecs, coeffs = new_vecs, new_coeffs
    return vecs[0], coeffs[0]


def volume_condition(fam: VectorFamily, epsilon: float) -> bool:
    """Exhaustive spread check at desk scale (family size <= 20).

    True iff for every member and every nonempty subset of the others, the
    sine of the angle between the member and the subset's span is at least
    1/(1 + epsilon).  (A tiny absolute slack absorbs rounding, so exactly
    orthonormal families pass at epsilon = 0.)
    """
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    p = fam.size
    if p > 20:
        raise ValueError("exhaustive subset check is limited to 20 vectors")
    threshold = 1.0 / (1.0 + epsilon) - 1e-9
    vectors = fam.vectors
    for i in range(p):
        others = [j for j in range(p) if j != i]
        qi = vectors[i]
        for size in range(1, p):
            for subset in combinations(others, size):
                basis = vectors[list(subset)].T
                coef, *_ = np.linalg.lstsq(basis, qi, rcond=None)
                resid = qi - basis @ coef
                if np.linalg.norm(resid) < threshold:
                    return False
    return True


def cap_probability_estimate(s: int, c: float, samples: int, seed: int = 0) -> float:
    """Monte Carlo P(<u, e1> >= sqrt(c/s)) for u uniform on the unit sphere.

    Samples standard normal vectors in chunks and normalizes, so the memory
    footprint stays flat for large sample counts.
    """
    if not (0 < c < s):
        raise ValueError("need 0 < c < s")
    if samples < 1:
        raise ValueError("need at least one sample")
    threshold = np.sqrt(c / s)
    rng = np.random.default_rng(seed)
    hits = 0
    remaining = samples
    chunk = max(1, min(samples, 2_000_000 // max(s, 1)))
    while remaining > 0:
        m = min(chunk, remaining)
        g = rng.standard_normal((m, s))
        hits += int(np.count_nonzero(g[:, 0] >= threshold * np.linalg.norm(g, axis=1)))
        remaining -= m
    return hits / samples


def cap_probability_lower_bound(c: float) -> float:
    """The closed-form floor (1/4) (2e)^(-c/2) the estimate is tested against."""
    return 0.25 * (2.0 * np.e) ** (-c / 2.0)


def orthonormal_family_with_cosine(p: int, cosine: float) -> VectorFamily:
    """Orthonormal q_1..q_p in R^(p+1), each with <q_i, e_1> = cosine.

    Pairwise orthogonality with a shared first coordinate is feasible only
    for cosine <= 1/sqrt(p).  Useful as a worked example where the boost is
    exact: every pairing round multiplies the cosine by exactly sqrt(2).
    """
    if p < 1:
        raise ValueError("need at least one vector")
    if not (0.0 < cosine <= 1.0 / np.sqrt(p)):
        raise ValueError("cosine must lie in (0, 1/sqrt(p)]")
    beta = (np.sqrt(1.0 - p * cosine**2) - 1.0) / p
    tails = np.eye(p) + beta * np.ones((p, p))
    vectors = np.hstack([np.full((p, 1), cosine), tails])
    target = np.zeros(p + 1)
    target[0] = 1.0
    return VectorFamily(target=target, vectors=vectors)
