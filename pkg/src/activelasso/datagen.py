"""Synthetic data generators and column standardization.

Every generator is a deterministic function of its shape parameters and a
64-bit seed (numpy's PCG64 family); the seed is recorded on the returned
``Dataset``.  Composite generators derive independent child streams from
the one seed through ``numpy.random.SeedSequence``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit


@dataclass
class Dataset:
    """A design matrix with its response, and the ground truth if synthetic.

    ``seed`` is None for data read from files (no randomness involved).
    """

    design: np.ndarray
    response: np.ndarray
    ground_truth: np.ndarray | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.design.ndim != 2:
            raise ValueError("design must be 2-D")
        if self.response.shape[0] != self.design.shape[0]:
            raise ValueError("response length must match the design row count")

    @property
    def n_rows(self) -> int:
        return self.design.shape[0]

    @property
    def n_cols(self) -> int:
        return self.design.shape[1]


@dataclass
class StandardizationParams:
    """Training-set column statistics, reapplied verbatim to other splits."""

    col_mean: np.ndarray
    col_std: np.ndarray
    response_mean: float
    dropped: np.ndarray  # original indices of zero-variance columns


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def _orthonormal_rows(M: np.ndarray) -> np.ndarray:
    # QR of the transpose: Q has orthonormal columns, so Q.T has orthonormal rows
    q, _ = np.linalg.qr(M.T)
    return np.ascontiguousarray(q.T)


def gaussian_ensemble(k: int, n: int, seed) -> np.ndarray:
    """k x n matrix with iid standard normal entries and orthonormalized rows."""
    if k > n:
        raise ValueError("row count k must not exceed column count n")
    return _orthonormal_rows(_rng(seed).standard_normal((k, n)))


def binary_ensemble(k: int, n: int, seed) -> np.ndarray:
    """Like ``gaussian_ensemble`` but from +-1 entries (p = 1/2 each)."""
    if k > n:
        raise ValueError("row count k must not exceed column count n")
    signs = _rng(seed).integers(0, 2, size=(k, n)) * 2.0 - 1.0
    return _orthonormal_rows(signs)


def spike_signal(n: int, s: int, seed) -> np.ndarray:
    """Length-n vector with exactly s nonzeros, each +-1, at random positions."""
    if s > n:
        raise ValueError("sparsity s must not exceed the length n")
    rng = _rng(seed)
    z = np.zeros(n)
    if s:
        pos = rng.choice(n, size=s, replace=False)
        z[pos] = rng.integers(0, 2, size=s) * 2.0 - 1.0
    return z


def observe(A: np.ndarray, z: np.ndarray, variance: float, seed) -> np.ndarray:
    """b = A z + Gaussian noise of the given variance per entry."""
    if variance < 0:
        raise ValueError("variance must be nonnegative")
    if A.shape[1] != z.shape[0]:
        raise ValueError("signal length must match the column count")
    b = A @ z
    if variance > 0:
        b = b + np.sqrt(variance) * _rng(seed).standard_normal(A.shape[0])
    return b


def signal_recovery_dataset(
    ensemble: str,
    k: int,
    n: int,
    s: int,
    noise_variance: float = 1e-4,
    seed: int = 0,
) -> Dataset:
    """Ensemble matrix, +-1 spike signal, and noisy observations in one bundle."""
    if ensemble not in ("gaussian", "binary"):
        raise ValueError("ensemble must be 'gaussian' or 'binary'")
    s_mat, s_sig, s_noise = np.random.SeedSequence(seed).spawn(3)
    make = gaussian_ensemble if ensemble == "gaussian" else binary_ensemble
    A = make(k, n, s_mat)
    z = spike_signal(n, s, s_sig)
    b = observe(A, z, noise_variance, s_noise)
    return Dataset(design=A, response=b, ground_truth=z, seed=seed)


def noisy_regression_dataset(n: int, d: int, s: int, seed: int = 0) -> Dataset:
    """Uniform [0,1] design, s-sparse uniform [0,1] truth, noise variance 0.1."""
    if s > d:
        raise ValueError("sparsity s must not exceed the column count d")
    s_mat, s_sig, s_noise = np.random.SeedSequence(seed).spawn(3)
    A = _rng(s_mat).random((n, d))
    rng = _rng(s_sig)
    z = np.zeros(d)
    pos = rng.choice(d, size=s, replace=False)
    z[pos] = rng.random(s)
    b = observe(A, z, 0.1, s_noise)
    return Dataset(design=A, response=b, ground_truth=z, seed=seed)


def correlated_dataset(n: int, d: int, rho: float, seed: int = 0) -> Dataset:
    """Equicorrelated Gaussian design with a fixed decaying alternating truth.

    Each row shares one factor g: A_ij = sqrt(rho) g_i + sqrt(1-rho) e_ij,
    giving population correlation rho between every pair of columns.  The
    truth is z_j = (-1)^j exp(-2 (j-1)/20) for j = 1..d, and the noise is
    scaled so that the realized signal-to-noise ratio var(Az)/var(noise)
    equals 3.0 on the generated sample.
    """
    if not (0 <= rho < 1):
        raise ValueError("rho must lie in [0, 1)")
    s_mat, s_noise = np.random.SeedSequence(seed).spawn(2)
    rng = _rng(s_mat)
    shared = rng.standard_normal((n, 1))
    A = np.sqrt(rho) * shared + np.sqrt(1.0 - rho) * rng.standard_normal((n, d))
    j = np.arange(1, d + 1)
    z = (-1.0) ** j * np.exp(-2.0 * (j - 1) / 20.0)
    signal = A @ z
    noise = _rng(s_noise).standard_normal(n)
    k_noise = np.sqrt(signal.var() / (3.0 * noise.var()))
    return Dataset(design=A, response=signal + k_noise * noise, ground_truth=z, seed=seed)


def synthetic_logistic_dataset(n: int, d: int, s: int, seed: int = 0) -> Dataset:
    """Gaussian design, s-sparse +-1 truth, Bernoulli labels at the sigmoid."""
    if s > d:
        raise ValueError("sparsity s must not exceed the column count d")
    s_mat, s_sig, s_lab = np.random.SeedSequence(seed).spawn(3)
    A = _rng(s_mat).standard_normal((n, d))
    z = spike_signal(d, s, s_sig)
    y = (_rng(s_lab).random(n) < expit(A @ z)).astype(float)
    return Dataset(design=A, response=y, ground_truth=z, seed=seed)


def split_rows(ds: Dataset, n_first: int) -> tuple[Dataset, Dataset]:
    """Split a dataset into its first n rows and the rest (shared truth)."""
    if not (0 < n_first < ds.n_rows):
        raise ValueError("split point must be strictly inside the row range")
    first = Dataset(ds.design[:n_first], ds.response[:n_first], ds.ground_truth, ds.seed)
    rest = Dataset(ds.design[n_first:], ds.response[n_first:], ds.ground_truth, ds.seed)
    return first, rest


def standardize(
    train: Dataset, others: list[Dataset] | tuple[Dataset, ...] = ()
) -> tuple[list[Dataset], StandardizationParams]:
    """Center/scale columns and center the response, by training statistics.

    Zero-variance training columns are dropped from every dataset and
    recorded in the returned params.  The validation (and any further)
    datasets are transformed with the training means and deviations, never
    their own.  Returns [train', others'...] plus the parameters.
    """
    A = train.design
    mean = A.mean(axis=0)
    std = A.std(axis=0)
    dropped = np.flatnonzero(std == 0.0)
    kept = std > 0.0
    b_mean = float(train.response.mean())

    def apply(ds: Dataset) -> Dataset:
        if ds.n_cols != train.n_cols:
            raise ValueError("all datasets must share the training column count")
        return Dataset(
            design=(ds.design[:, kept] - mean[kept]) / std[kept],
            response=ds.response - b_mean,
            ground_truth=None,
            seed=ds.seed,
        )

    params = StandardizationParams(
        col_mean=mean[kept], col_std=std[kept], response_mean=b_mean, dropped=dropped
    )
    return [apply(train)] + [apply(ds) for ds in others], params
