"""Dense symmetric eigendecompositions and the rearrangement distance on spectra."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import Graph

__all__ = [
    "Spectrum",
    "scaled_adjacency",
    "sym_eigen",
    "rearrangement_distance",
]

VALUE_DESC = "by-value-desc"
MAGNITUDE_DESC = "by-magnitude-desc"


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of a symmetric matrix with a declared sort order.

    ``vectors``, when present, holds the matching orthonormal eigenvectors as
    columns, permuted consistently with ``values``.
    """

    values: np.ndarray
    vectors: Optional[np.ndarray]
    order: str

    @property
    def n(self) -> int:
        return self.values.shape[0]


def scaled_adjacency(g: Graph) -> np.ndarray:
    """Adjacency matrix divided by the node count; exactly symmetric, zero trace."""
    return g.adjacency.astype(float) / g.n


def sym_eigen(m: np.ndarray, want_vectors: bool = False, order: str = MAGNITUDE_DESC) -> Spectrum:
    """Full eigendecomposition of a symmetric matrix.

    ``order`` is one of ``"by-value-desc"`` or ``"by-magnitude-desc"``; under
    magnitude order, equal-magnitude values of opposite sign put the positive
    one first so the output is deterministic.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("input must be a square matrix")
    if m.size and np.max(np.abs(m - m.T)) > 1e-12:
        raise ValueError("input matrix is not symmetric within 1e-12")
    if order not in (VALUE_DESC, MAGNITUDE_DESC):
        raise ValueError(f"unknown sort order {order!r}")
    if want_vectors:
        values, vectors = np.linalg.eigh(m)
    else:
        values = np.linalg.eigvalsh(m)
        vectors = None
    if order == VALUE_DESC:
        idx = np.argsort(-values, kind="stable")
    else:
        idx = np.lexsort((-values, -np.abs(values)))
    values = values[idx]
    if vectors is not None:
        vectors = vectors[:, idx]
    return Spectrum(values=values, vectors=vectors, order=order)


def rearrangement_distance(x, y) -> float:
    """l2 distance between two real sequences minimized over pairings.

    Both sequences are zero-padded to a common length; sorting each in
    ascending order and matching positionally attains the infimum over
    permutations (rearrangement inequality for squared-difference costs).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    size = max(x.size, y.size)
    xp = np.zeros(size)
    yp = np.zeros(size)
    xp[: x.size] = x
    yp[: y.size] = y
    return float(np.linalg.norm(np.sort(xp) - np.sort(yp)))
