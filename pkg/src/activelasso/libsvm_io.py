"""Reading and writing datasets in the LIBSVM text format.

Each line is ``label idx:val idx:val ...`` with 1-based, strictly ascending
feature indices; absent entries are zero.  Files are materialized densely
(desk scale).  Generated datasets can be written back to the same format
together with a JSON sidecar recording how they were made.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .datagen import Dataset


class LibsvmFormatError(ValueError):
    """Malformed input line; the message carries the 1-based line number."""


def read_libsvm(path, n_features: int | None = None, classification: bool = False) -> Dataset:
    """Parse a LIBSVM file into a dense dataset.

    With ``classification`` the labels must be -1/+1 (mapped to 0/1) or
    already 0/1; otherwise they are kept as real regression targets.  The
    column count is the largest index seen unless ``n_features`` pins it.
    """
    labels: list[float] = []
    rows: list[tuple[list[int], list[float]]] = []
    widest = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            try:
                label = float(parts[0])
            except ValueError:
                raise LibsvmFormatError(f"{path}:{lineno}: bad label {parts[0]!r}") from None
            idxs: list[int] = []
            vals: list[float] = []
            prev = 0
            for tok in parts[1:]:
                head, _, tail = tok.partition(":")
                try:
                    idx = int(head)
                    val = float(tail)
                except ValueError:
                    raise LibsvmFormatError(f"{path}:{lineno}: bad feature {tok!r}") from None
                if idx <= prev:
                    raise LibsvmFormatError(
                        f"{path}:{lineno}: feature indices must be >= 1 and strictly ascending"
                    )
                prev = idx
                idxs.append(idx)
                vals.append(val)
            if classification:
                if label in (-1.0, 0.0):
                    label = 0.0
                elif label == 1.0:
                    label = 1.0
                else:
                    raise LibsvmFormatError(
                        f"{path}:{lineno}: classification label must be -1, 0 or +1"
                    )
            labels.append(label)
            rows.append((idxs, vals))
            widest = max(widest, prev)
    if not rows:
        raise LibsvmFormatError(f"{path}: no data lines")
    n_cols = n_features if n_features is not None else widest
    if widest > n_cols:
        raise LibsvmFormatError(f"{path}: feature index {widest} exceeds n_features={n_features}")
    A = np.zeros((len(rows), n_cols))
    for i, (idxs, vals) in enumerate(rows):
        A[i, np.asarray(idxs, dtype=int) - 1] = vals
    return Dataset(design=A, response=np.asarray(labels), ground_truth=None, seed=None)


def write_libsvm(path, ds: Dataset) -> None:
    """Write the dataset sparsely (zero entries omitted, 1-based indices)."""
    with open(path, "w") as fh:
        for i in range(ds.n_rows):
            row = ds.design[i]
            nz = np.flatnonzero(row)
            feats = " ".join(f"{j + 1}:{row[j]:.17g}" for j in nz)
            label = f"{ds.response[i]:.17g}"
            fh.write(f"{label} {feats}\n" if feats else f"{label}\n")


def sidecar_path(data_path) -> str:
    return f"{os.fspath(data_path)}.json"


def write_sidecar(data_path, ds: Dataset, generator: str | None = None, params: dict | None = None) -> str:
    """JSON sidecar next to the data file: shape, seed, generator, parameters."""
    doc = {
        "generator": generator,
        "params": params or {},
        "seed": ds.seed,
        "shape": [ds.n_rows, ds.n_cols],
        "ground_truth": None,
    }
    if ds.ground_truth is not None:
        nz = np.flatnonzero(ds.ground_truth)
        doc["ground_truth"] = {
            "indices": nz.tolist(),
            "values": ds.ground_truth[nz].tolist(),
            "length": int(ds.ground_truth.shape[0]),
        }
    out = sidecar_path(data_path)
    with open(out, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    return out


def read_sidecar(data_path) -> dict | None:
    """Load the sidecar if present; None otherwise."""
    out = sidecar_path(data_path)
    if not os.path.exists(out):
        return None
    with open(out) as fh:
        return json.load(fh)


def save_dataset(ds: Dataset, path, generator: str | None = None, params: dict | None = None) -> None:
    """Write the LIBSVM file and its sidecar in one call."""
    write_libsvm(path, ds)
    write_sidecar(path, ds, generator=generator, params=params)
