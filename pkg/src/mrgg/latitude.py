"""Latitude recovery: latent pairwise distances and their density.

The degree-1 harmonic eigenvectors of the scaled adjacency matrix span, up to
estimation noise, the coordinate functions of the latent points, so the
rescaled outer product of the d matching eigenvectors estimates the Gram
matrix of latent positions. The superdiagonal of that estimate recovers the
consecutive jump inner products, whose density is the latitude function.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import norm

from .spectral import VALUE_DESC, Spectrum

__all__ = [
    "GramEstimate",
    "isolation_gap",
    "estimate_gram",
    "true_gram",
    "superdiagonal_distances",
    "LatitudeDensity",
    "fit_latitude",
]


@dataclass(frozen=True)
class GramEstimate:
    """Rank-<=d estimate of the latent Gram matrix and the window that produced it."""

    matrix: np.ndarray  # (n, n), symmetric PSD, trace 1
    eigenvalues: np.ndarray  # the d adjacency eigenvalues spanning the estimate
    gap: float  # isolation score achieved by the selected window

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def isolation_gap(values, window_start: int, d: int) -> float:
    """Isolation score of a window of ``d`` consecutive entries of ``values``.

    Distance from the window, as a set, to the nearest eigenvalue outside it:
    the minimum over outside entries of their distance to the closest window
    member. Zero whenever the window cuts through a tied group.
    """
    values = np.asarray(values, dtype=float)
    n = values.size
    if not 0 <= window_start <= n - d:
        raise ValueError(f"window [{window_start}, {window_start + d}) out of range for {n} values")
    if n < d + 1:
        raise ValueError("need at least one eigenvalue outside the window")
    window = values[window_start : window_start + d]
    outside = np.concatenate([values[:window_start], values[window_start + d :]])
    return float(np.min(np.abs(outside[:, None] - window[None, :]).min(axis=1)))


def estimate_gram(spec: Spectrum, d: int) -> GramEstimate:
    """Select the most isolated window of ``d`` consecutive eigenvalues and build the Gram estimate.

    Requires eigenvectors and value-descending order: the d harmonic
    eigenvalues concentrate around a common limit and are consecutive under
    value order, whereas magnitude order interleaves signs. Ties in the
    maximal isolation keep the window with the larger mean eigenvalue.
    """
    if spec.vectors is None:
        raise ValueError("gram estimation needs eigenvectors")
    if spec.order != VALUE_DESC:
        raise ValueError("gram estimation expects a value-descending spectrum")
    n = spec.n
    if n < d + 1:
        raise ValueError(f"need at least {d + 1} eigenvalues, got {n}")
    values = spec.values
    gaps = np.array([isolation_gap(values, start, d) for start in range(n - d + 1)])
    best = int(np.argmax(gaps))
    if np.sum(gaps == gaps[best]) > 1:
        warnings.warn(
            "isolation score is tied across windows; keeping the one with the "
            "largest mean eigenvalue",
            stacklevel=2,
        )
    vectors = spec.vectors[:, best : best + d]
    matrix = (vectors @ vectors.T) / d
    return GramEstimate(matrix=matrix, eigenvalues=values[best : best + d], gap=float(gaps[best]))


def true_gram(points: np.ndarray) -> GramEstimate:
    """Gram matrix of known latent points, scaled like the estimator's output.

    Diagnostic mode: lets tests compare the estimate against its target and
    drive the distance-extraction path with exact inputs.
    """
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    matrix = (points @ points.T) / n
    return GramEstimate(matrix=matrix, eigenvalues=np.array([]), gap=np.inf)


def superdiagonal_distances(gram, n: Optional[int] = None) -> np.ndarray:
    """Consecutive-jump estimates: entries (i-1, i) of n * Gram, clamped into [-1, 1]."""
    matrix = gram.matrix if isinstance(gram, GramEstimate) else np.asarray(gram, dtype=float)
    if n is None:
        n = matrix.shape[0]
    return np.clip(n * np.diagonal(matrix, offset=1), -1.0, 1.0)


@dataclass(frozen=True)
class LatitudeDensity:
    """Gaussian-kernel density on [-1, 1] with per-kernel boundary renormalization.

    Each kernel is divided by its own mass inside [-1, 1], so the density is
    nonnegative and integrates to one on the support without reflection
    tricks. Evaluable, sampleable (inverse CDF on a tabulation), and
    serializable.
    """

    samples: np.ndarray
    bandwidth: float

    @property
    def m(self) -> int:
        return self.samples.size

    def pdf(self, x) -> np.ndarray:
        x_arr = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros_like(x_arr)
        inside = np.abs(x_arr) <= 1.0
        h = self.bandwidth
        mass = norm.cdf((1.0 - self.samples) / h) - norm.cdf((-1.0 - self.samples) / h)
        pts = x_arr[inside]
        acc = np.zeros_like(pts)
        # chunk over samples to bound the (points x samples) working set
        chunk = max(1, int(2**22 / max(pts.size, 1)))
        for lo in range(0, self.m, chunk):
            s = self.samples[lo : lo + chunk]
            z = norm.pdf((pts[:, None] - s[None, :]) / h) / (h * mass[lo : lo + chunk][None, :])
            acc += z.sum(axis=1)
        out[inside] = acc / self.m
        if np.ndim(x) == 0:
            return float(out[0])
        return out

    def cdf_table(self, size: int = 2048) -> tuple[np.ndarray, np.ndarray]:
        grid = np.linspace(-1.0, 1.0, size)
        density = self.pdf(grid)
        cdf = np.concatenate([[0.0], np.cumsum((density[1:] + density[:-1]) / 2.0 * np.diff(grid))])
        total = cdf[-1]
        if total <= 0:
            raise ValueError("degenerate density: zero total mass")
        return grid, cdf / total

    def sample(self, size: int, rng: np.random.Generator, table_size: int = 2048) -> np.ndarray:
        """Inverse-CDF draws through a tabulated CDF."""
        grid, cdf = self.cdf_table(table_size)
        return np.interp(rng.random(size), cdf, grid)

    def to_doc(self, grid_size: int = 512) -> dict:
        grid = np.linspace(-1.0, 1.0, grid_size)
        return {
            "samples": [float(v) for v in self.samples],
            "bandwidth": float(self.bandwidth),
            "grid": [float(v) for v in grid],
            "pdf": [float(v) for v in self.pdf(grid)],
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "LatitudeDensity":
        return cls(
            samples=np.asarray(doc["samples"], dtype=float),
            bandwidth=float(doc["bandwidth"]),
        )


def fit_latitude(distances, bandwidth: Optional[float] = None) -> LatitudeDensity:
    """Kernel density estimate of the latitude function from jump distances.

    Default bandwidth is Silverman's rule 0.9 * min(sd, IQR/1.34) * m^(-1/5),
    floored at 1e-3 (with a warning) when the sample is degenerate.
    """
    distances = np.asarray(distances, dtype=float)
    if distances.size < 2:
        raise ValueError("need at least two distances to fit a density")
    if np.any(np.abs(distances) > 1.0):
        raise ValueError("distances must lie in [-1, 1]")
    if bandwidth is None:
        sd = float(np.std(distances))
        q75, q25 = np.percentile(distances, [75, 25])
        scale = min(sd, (q75 - q25) / 1.34)
        bandwidth = 0.9 * scale * distances.size ** (-0.2)
        if bandwidth < 1e-3:
            warnings.warn("degenerate jump sample; flooring the KDE bandwidth at 1e-3", stacklevel=2)
            bandwidth = 1e-3
    elif bandwidth <= 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth!r}")
    return LatitudeDensity(samples=distances, bandwidth=float(bandwidth))
