"""Gegenbauer polynomials and spherical-harmonic dimension bookkeeping.

Connection kernels on the sphere S^(d-1) of the form W(x, y) = p(<x, y>)
diagonalize in the spherical-harmonic basis, with one eigenvalue per degree
repeated with the multiplicity of that degree. Everything needed to move
between the kernel profile p on [-1, 1] and its eigenvalue sequence is a
one-dimensional weighted polynomial transform, implemented here. Explicit
harmonic basis functions are never constructed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "harmonic_dim",
    "cumulative_dim",
    "harmonic_dims",
    "beta_param",
    "weight_normalizer",
    "reconstruction_coefficient",
    "gegenbauer",
    "gegenbauer_table",
    "EnvelopeSpectrum",
    "envelope_spectrum",
    "reconstruct_envelope",
    "sobolev_norm",
]


def _check_dimension(d: int) -> None:
    if int(d) != d or d < 3:
        raise ValueError(f"ambient dimension must be an integer >= 3, got {d!r}")


def harmonic_dim(l: int, d: int) -> int:
    """Dimension of the space of real spherical harmonics of degree ``l`` on S^(d-1).

    Exact integer arithmetic: 1 for degree 0, d for degree 1 and
    C(l+d-1, l) - C(l+d-3, l-2) beyond.
    """
    _check_dimension(d)
    if int(l) != l or l < 0:
        raise ValueError(f"degree must be a nonnegative integer, got {l!r}")
    if l == 0:
        return 1
    if l == 1:
        return d
    return math.comb(l + d - 1, l) - math.comb(l + d - 3, l - 2)


def cumulative_dim(R: int, d: int) -> int:
    """Total dimension of all harmonic spaces of degree <= ``R`` (equals (R+1)^2 for d=3)."""
    if int(R) != R or R < 0:
        raise ValueError(f"resolution must be a nonnegative integer, got {R!r}")
    return sum(harmonic_dim(l, d) for l in range(R + 1))


def harmonic_dims(R: int, d: int) -> list[int]:
    """Multiplicity list [dim(0), ..., dim(R)]."""
    if int(R) != R or R < 0:
        raise ValueError(f"resolution must be a nonnegative integer, got {R!r}")
    return [harmonic_dim(l, d) for l in range(R + 1)]


def beta_param(d: int) -> float:
    """Gegenbauer parameter (d-2)/2 attached to the sphere S^(d-1)."""
    _check_dimension(d)
    return (d - 2) / 2.0


def weight_normalizer(d: int) -> float:
    """Constant making the weight (1-t^2)^((d-3)/2) integrate to its reciprocal.

    Computed through log-gamma so large dimensions do not overflow.
    """
    _check_dimension(d)
    return math.exp(math.lgamma(d / 2.0) - math.lgamma(0.5) - math.lgamma((d - 1) / 2.0))


def reconstruction_coefficient(k: int, d: int) -> float:
    """Factor (2k+d-2)/(d-2) pairing degree-k eigenvalues with Gegenbauer values."""
    _check_dimension(d)
    if int(k) != k or k < 0:
        raise ValueError(f"degree must be a nonnegative integer, got {k!r}")
    return (2 * k + d - 2) / (d - 2)


def gegenbauer(k: int, beta: float, t):
    """Gegenbauer polynomial of degree ``k`` with parameter ``beta`` at ``t``.

    Evaluated by the three-term recurrence
    ``k*G_k = 2t(k+beta-1)*G_{k-1} - (k+2beta-2)*G_{k-2}`` starting from
    ``G_0 = 1`` and ``G_1 = 2*beta*t``; stable and O(k) per point.
    Accepts scalars or arrays in [-1, 1].
    """
    if int(k) != k or k < 0:
        raise ValueError(f"degree must be a nonnegative integer, got {k!r}")
    if beta <= 0:
        raise ValueError(f"Gegenbauer parameter must be positive, got {beta!r}")
    t_arr = np.asarray(t, dtype=float)
    out = _gegenbauer_recurrence(k, beta, t_arr)[-1]
    if np.isscalar(t) or t_arr.ndim == 0:
        return float(out)
    return out


def gegenbauer_table(R: int, beta: float, t: np.ndarray) -> np.ndarray:
    """Stacked values G_0..G_R at the points ``t``, shape (R+1, len(t))."""
    if beta <= 0:
        raise ValueError(f"Gegenbauer parameter must be positive, got {beta!r}")
    return np.vstack(_gegenbauer_recurrence(R, beta, np.asarray(t, dtype=float)))


def _gegenbauer_recurrence(k_max: int, beta: float, t: np.ndarray) -> list[np.ndarray]:
    values = [np.ones_like(t)]
    if k_max >= 1:
        values.append(2.0 * beta * t)
    for k in range(2, k_max + 1):
        nxt = (2.0 * t * (k + beta - 1.0) * values[k - 1] - (k + 2.0 * beta - 2.0) * values[k - 2]) / k
        values.append(nxt)
    return values


@dataclass(frozen=True)
class EnvelopeSpectrum:
    """Degree-indexed eigenvalues of a connection kernel on S^(d-1).

    ``coefficients[k]`` is the eigenvalue attached to harmonic degree k; it
    carries multiplicity ``harmonic_dim(k, d)`` in the operator spectrum.
    """

    coefficients: np.ndarray
    d: int

    def __post_init__(self):
        coeffs = np.atleast_1d(np.asarray(self.coefficients, dtype=float))
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise ValueError("coefficients must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite")
        _check_dimension(self.d)
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def resolution(self) -> int:
        return self.coefficients.size - 1

    def with_multiplicity(self) -> np.ndarray:
        """Eigenvalues repeated according to their harmonic multiplicities."""
        dims = harmonic_dims(self.resolution, self.d)
        return np.repeat(self.coefficients, dims)


def envelope_spectrum(p, d: int, R: int, quad_nodes: int = 128) -> EnvelopeSpectrum:
    """Eigenvalues of the kernel t -> p(t) up to degree ``R`` by Gauss-Legendre quadrature.

    The degree-l eigenvalue is the weighted projection of p onto the degree-l
    Gegenbauer polynomial, with the weight (1-t^2)^(beta-1/2) folded into the
    integrand. 128 nodes integrate polynomial integrands up to degree 255
    exactly, which covers every resolution used here.
    """
    _check_dimension(d)
    if int(R) != R or R < 0:
        raise ValueError(f"resolution must be a nonnegative integer, got {R!r}")
    if quad_nodes < 2 * R + 2:
        raise ValueError(f"need at least {2 * R + 2} quadrature nodes for resolution {R}")
    beta = beta_param(d)
    nodes, weights = np.polynomial.legendre.leggauss(quad_nodes)
    vals = _evaluate_profile(p, nodes)
    if not np.all(np.isfinite(vals)):
        raise ValueError("envelope evaluated to a non-finite value at a quadrature node")
    w_beta = (1.0 - nodes**2) ** (beta - 0.5)
    table = gegenbauer_table(R, beta, nodes)
    b_d = weight_normalizer(d)
    coeffs = np.empty(R + 1)
    for l in range(R + 1):
        c_l = reconstruction_coefficient(l, d)
        d_l = harmonic_dim(l, d)
        coeffs[l] = (c_l * b_d / d_l) * np.sum(weights * vals * table[l] * w_beta)
    return EnvelopeSpectrum(coefficients=coeffs, d=d)


def _evaluate_profile(p, t: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(p(t), dtype=float)
        if vals.shape == t.shape:
            return vals
    except (TypeError, ValueError):
        pass
    return np.asarray([p(x) for x in t], dtype=float)


def reconstruct_envelope(spec: EnvelopeSpectrum, grid, clip: bool = False) -> np.ndarray:
    """Evaluate the kernel profile encoded by ``spec`` on ``grid``.

    Pointwise sum of coefficient * reconstruction_coefficient * Gegenbauer
    value over all stored degrees; with ``clip`` the result is clamped into
    [0, 1] so it is usable as a connection probability.
    """
    grid_arr = np.asarray(grid, dtype=float)
    if np.any(np.abs(grid_arr) > 1.0 + 1e-12):
        raise ValueError("grid values must lie in [-1, 1]")
    beta = beta_param(spec.d)
    flat = np.clip(np.atleast_1d(grid_arr).ravel(), -1.0, 1.0)
    table = gegenbauer_table(spec.resolution, beta, flat)
    c = np.array([reconstruction_coefficient(k, spec.d) for k in range(spec.resolution + 1)])
    out = (spec.coefficients * c) @ table
    if clip:
        out = np.clip(out, 0.0, 1.0)
    if grid_arr.ndim == 0:
        return float(out[0])
    return out.reshape(grid_arr.shape)


def sobolev_norm(spec: EnvelopeSpectrum, s: float) -> float:
    """Weighted Sobolev norm of the profile with the stored (finite) coefficients.

    Square root of sum_l dim_l |g_l|^2 (1 + (l(l+2*beta))^s).
    """
    if s <= 0:
        raise ValueError(f"regularity must be positive, got {s!r}")
    beta = beta_param(spec.d)
    total = 0.0
    for l, g in enumerate(spec.coefficients):
        weight = 1.0 + (l * (l + 2.0 * beta)) ** s
        total += harmonic_dim(l, spec.d) * g * g * weight
    return math.sqrt(total)
