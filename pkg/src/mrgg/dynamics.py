"""Markovian latent dynamics on the sphere and the induced random graph.

nodes carry latent unit vectors X_1, X_2, ... built by jumping from the
previous point: X_i = r_i * X_{i-1} + sqrt(1 - r_i^2) * Y_i with Y_i uniform
on the subsphere orthogonal to X_{i-1} and r_i drawn from the latitude
distribution. Edges are independent Bernoulli draws with probability
zeta * p(<X_i, X_j>) for an envelope function p and sparsity factor zeta.
"""

from __future__ import annotations

import base64
import json
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .harmonics import EnvelopeSpectrum, beta_param, reconstruct_envelope, weight_normalizer

__all__ = [
    "HeavisideEnvelope",
    "ConstantEnvelope",
    "GegenbauerEnvelope",
    "LatitudeDistribution",
    "uniform_latitude",
    "beta_mixture",
    "scaled_beta",
    "custom_latitude",
    "latitude_pdf",
    "LatentChain",
    "Graph",
    "as_rng",
    "replicate_rng",
    "sample_uniform_sphere",
    "sample_uniform_orthogonal",
    "sample_chain",
    "sample_graph",
    "graph_to_doc",
    "graph_from_doc",
    "save_graph",
    "load_graph",
]


# ---------------------------------------------------------------------------
# envelope functions


class HeavisideEnvelope:
    """Threshold connection rule: probability 1 iff the inner product is >= 0."""

    def __call__(self, t):
        return (np.asarray(t, dtype=float) >= 0.0).astype(float)

    def __repr__(self):
        return "HeavisideEnvelope()"


@dataclass(frozen=True)
class ConstantEnvelope:
    """Distance-blind connection rule with a fixed probability level."""

    level: float

    def __post_init__(self):
        if not 0.0 <= self.level <= 1.0:
            raise ValueError(f"envelope level must lie in [0, 1], got {self.level!r}")

    def __call__(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.level)


@dataclass(frozen=True)
class GegenbauerEnvelope:
    """Connection profile given by a finite Gegenbauer expansion, clamped into [0, 1]."""

    spectrum: EnvelopeSpectrum

    def __call__(self, t):
        return reconstruct_envelope(self.spectrum, np.asarray(t, dtype=float), clip=True)


# ---------------------------------------------------------------------------
# latitude distributions


@dataclass(frozen=True)
class LatitudeDistribution:
    """Distribution on [-1, 1] of the inner product between consecutive latent points.

    ``kind`` selects the family:

    - ``"uniform"``: the jump law of independent uniform points on S^(d-1),
      with density proportional to (1-r^2)^((d-3)/2) (constant 1/2 for d=3).
      This is the null model for the dynamics test.
    - ``"beta-mixture"``: density 0.5*g(1-r; a, b) for r >= 0 and
      0.5*g(1+r; a, b) for r < 0, with g the Beta(a, b) density.
    - ``"scaled-beta"``: a Beta(a, b) draw mapped affinely from [0, 1] onto
      [-1, 1].
    - ``"custom"``: caller-supplied pdf and sampler.
    """

    kind: str
    d: Optional[int] = None
    a: Optional[float] = None
    b: Optional[float] = None
    custom_pdf: Optional[Callable] = None
    custom_sampler: Optional[Callable] = None

    def pdf(self, r):
        r_arr = np.asarray(r, dtype=float)
        if self.kind == "uniform":
            beta = beta_param(self.d)
            out = weight_normalizer(self.d) * (1.0 - np.clip(r_arr, -1.0, 1.0) ** 2) ** (beta - 0.5)
        elif self.kind == "beta-mixture":
            out = 0.5 * np.where(
                r_arr >= 0.0,
                _beta_pdf(1.0 - r_arr, self.a, self.b),
                _beta_pdf(1.0 + r_arr, self.a, self.b),
            )
        elif self.kind == "scaled-beta":
            out = 0.5 * _beta_pdf((r_arr + 1.0) / 2.0, self.a, self.b)
        elif self.kind == "custom":
            out = np.asarray(self.custom_pdf(r_arr), dtype=float)
        else:
            raise ValueError(f"unknown latitude kind {self.kind!r}")
        if np.isscalar(r) or np.ndim(r) == 0:
            return float(out)
        return out

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "uniform":
            half = (self.d - 1) / 2.0
            return 2.0 * rng.beta(half, half, size=size) - 1.0
        if self.kind == "beta-mixture":
            z = rng.beta(self.a, self.b, size=size)
            positive = rng.random(size) < 0.5
            return np.where(positive, 1.0 - z, z - 1.0)
        if self.kind == "scaled-beta":
            return 2.0 * rng.beta(self.a, self.b, size=size) - 1.0
        if self.kind == "custom":
            return np.asarray(self.custom_sampler(size, rng), dtype=float)
        raise ValueError(f"unknown latitude kind {self.kind!r}")

    def validate(self, tol: float = 1e-6) -> None:
        """Check nonnegativity and unit mass on [-1, 1] by quadrature.

        Integrates each half separately so the two-sided Beta family, whose
        density has a kink at 0, is handled at full accuracy.
        """
        nodes, weights = np.polynomial.legendre.leggauss(128)
        mass = 0.0
        for lo, hi in ((-1.0, 0.0), (0.0, 1.0)):
            mid, half = (lo + hi) / 2.0, (hi - lo) / 2.0
            vals = self.pdf(mid + half * nodes)
            if np.any(vals < -1e-12):
                raise ValueError("latitude pdf takes negative values on [-1, 1]")
            mass += half * float(np.sum(weights * vals))
        if abs(mass - 1.0) > tol:
            raise ValueError(f"latitude pdf integrates to {mass:.8f}, expected 1")


def _beta_pdf(z, a: float, b: float):
    from scipy.stats import beta as beta_dist

    z_arr = np.asarray(z, dtype=float)
    out = np.zeros_like(z_arr)
    inside = (z_arr >= 0.0) & (z_arr <= 1.0)
    out[inside] = beta_dist.pdf(z_arr[inside], a, b)
    return out


def uniform_latitude(d: int) -> LatitudeDistribution:
    """Jump law of independent uniform points on S^(d-1)."""
    beta_param(d)  # validates d >= 3
    return LatitudeDistribution(kind="uniform", d=d)


def beta_mixture(a: float, b: float) -> LatitudeDistribution:
    """Symmetric two-sided Beta family concentrated away from 0."""
    _check_beta_params(a, b)
    return LatitudeDistribution(kind="beta-mixture", a=float(a), b=float(b))


def scaled_beta(a: float, b: float) -> LatitudeDistribution:
    """Beta(a, b) mapped from [0, 1] onto [-1, 1]."""
    _check_beta_params(a, b)
    return LatitudeDistribution(kind="scaled-beta", a=float(a), b=float(b))


def custom_latitude(pdf: Callable, sampler: Callable) -> LatitudeDistribution:
    """User-supplied latitude law; both the pdf and a sampler must be given."""
    lat = LatitudeDistribution(kind="custom", custom_pdf=pdf, custom_sampler=sampler)
    return lat


def _check_beta_params(a: float, b: float) -> None:
    if a <= 0 or b <= 0:
        raise ValueError(f"Beta parameters must be positive, got ({a!r}, {b!r})")


def latitude_pdf(lat: LatitudeDistribution, r: float) -> float:
    """Density of the latitude distribution at ``r`` in [-1, 1]."""
    if np.any(np.abs(np.asarray(r, dtype=float)) > 1.0):
        raise ValueError("latitude argument must lie in [-1, 1]")
    return lat.pdf(r)


# ---------------------------------------------------------------------------
# latent chain and graph


@dataclass(frozen=True)
class LatentChain:
    """Ordered latent positions plus the jump inner products that generated them."""

    points: np.ndarray  # (n, d), unit rows
    jumps: np.ndarray  # (n-1,), jumps[i] = <points[i], points[i+1]>
    seed: Optional[int] = None

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def validate(self) -> None:
        norms = np.linalg.norm(self.points, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-12:
            raise ValueError("chain points must be unit vectors")
        if self.n >= 2:
            dots = np.sum(self.points[:-1] * self.points[1:], axis=1)
            if np.max(np.abs(dots - self.jumps)) > 1e-10:
                raise ValueError("stored jumps disagree with consecutive inner products")


@dataclass(frozen=True)
class Graph:
    """Symmetric hollow 0/1 adjacency matrix with its sparsity factor."""

    adjacency: np.ndarray  # (n, n) uint8
    zeta: float = 1.0
    seed: Optional[int] = None

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    def edge_count(self) -> int:
        return int(self.adjacency.sum()) // 2

    def density(self) -> float:
        if self.n < 2:
            return 0.0
        return 2.0 * self.edge_count() / (self.n * (self.n - 1))

    def validate(self) -> None:
        a = self.adjacency
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("adjacency must be square")
        if not np.array_equal(a, a.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diag(a) != 0):
            raise ValueError("adjacency must have a zero diagonal")
        if not np.all((a == 0) | (a == 1)):
            raise ValueError("adjacency entries must be 0 or 1")
        if not 0.0 < self.zeta <= 1.0:
            raise ValueError(f"sparsity factor must lie in (0, 1], got {self.zeta!r}")


def as_rng(seed) -> np.random.Generator:
    """Accept an integer seed, a SeedSequence, or a ready Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def replicate_rng(master_seed: int, index: int) -> np.random.Generator:
    """Independent stream for replicate ``index`` derived from the master seed."""
    return np.random.default_rng(np.random.SeedSequence((int(master_seed), int(index))))


def sample_uniform_sphere(d: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw on S^(d-1) via a normalized standard Gaussian."""
    while True:
        g = rng.standard_normal(d)
        norm = np.linalg.norm(g)
        if norm > 1e-12:
            return g / norm


def sample_uniform_orthogonal(x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw on the subsphere orthogonal to the unit vector ``x``.

    A standard Gaussian is projected onto the orthogonal complement of x and
    normalized; degenerate draws with projected norm below 1e-12 are redrawn.
    """
    x = np.asarray(x, dtype=float)
    while True:
        g = rng.standard_normal(x.shape[0])
        proj = g - np.dot(g, x) * x
        norm = np.linalg.norm(proj)
        if norm > 1e-12:
            return proj / norm


def sample_chain(n: int, d: int, lat: LatitudeDistribution, seed) -> LatentChain:
    """Sample ``n`` latent positions with Markovian jumps drawn from ``lat``.

    The first point is uniform on S^(d-1); each later point jumps from its
    predecessor with inner product drawn from the latitude distribution and a
    uniformly chosen orthogonal direction. Deterministic given the seed.
    """
    if n < 1:
        raise ValueError(f"need at least one point, got n={n!r}")
    beta_param(d)  # validates d >= 3
    rng = as_rng(seed)
    points = np.empty((n, d))
    jumps = np.empty(max(n - 1, 0))
    points[0] = sample_uniform_sphere(d, rng)
    for i in range(1, n):
        r = float(lat.sample(1, rng)[0])
        y = sample_uniform_orthogonal(points[i - 1], rng)
        step = r * points[i - 1] + np.sqrt(max(1.0 - r * r, 0.0)) * y
        points[i] = step / np.linalg.norm(step)
        jumps[i - 1] = r
    return LatentChain(points=points, jumps=jumps, seed=seed if isinstance(seed, int) else None)


def sample_graph(chain: LatentChain, p, zeta: float = 1.0, seed=None) -> Graph:
    """Draw the random graph on the chain's points with envelope ``p``.

    Edges are independent Bernoulli(zeta * p(<X_i, X_j>)) for i < j,
    symmetrized with a zero diagonal. Deterministic given the seed.
    """
    if not 0.0 < zeta <= 1.0:
        raise ValueError(f"sparsity factor must lie in (0, 1], got {zeta!r}")
    rng = as_rng(seed)
    n = chain.n
    gram = np.clip(chain.points @ chain.points.T, -1.0, 1.0)
    probs = np.asarray(p(gram), dtype=float)
    if not np.all(np.isfinite(probs)):
        raise ValueError("envelope evaluated to a non-finite value")
    if probs.min() < 0.0 or probs.max() > 1.0:
        raise ValueError("envelope values must lie in [0, 1]")
    u = rng.random((n, n))
    upper = np.triu(u < zeta * probs, k=1)
    adjacency = (upper | upper.T).astype(np.uint8)
    return Graph(adjacency=adjacency, zeta=float(zeta), seed=seed if isinstance(seed, int) else None)


# ---------------------------------------------------------------------------
# serialization

_SCHEMA = "mrgg.graph.v1"


def graph_to_doc(graph: Optional[Graph], d: int, chain: Optional[LatentChain] = None) -> dict:
    """JSON-ready container for a graph and/or its latent chain.

    Layout: ``{"schema", "n", "d", "zeta", "adjacency", "points", "jumps",
    "seed"}`` where ``adjacency`` packs each row into ceil(n/8) big-endian
    bytes, concatenated row-major and base64-encoded; ``points`` is a flat
    row-major list of doubles. ``adjacency``/``points``/``jumps`` may each be
    null when not available.
    """
    if graph is None and chain is None:
        raise ValueError("need a graph or a chain to serialize")
    n = graph.n if graph is not None else chain.n
    doc = {
        "schema": _SCHEMA,
        "n": int(n),
        "d": int(d),
        "zeta": float(graph.zeta) if graph is not None else None,
        "adjacency": None,
        "points": None,
        "jumps": None,
        "seed": graph.seed if graph is not None else chain.seed,
    }
    if graph is not None:
        packed = np.packbits(graph.adjacency, axis=1, bitorder="big")
        doc["adjacency"] = base64.b64encode(packed.tobytes()).decode("ascii")
    if chain is not None:
        if chain.n != n:
            raise ValueError("chain and graph sizes disagree")
        doc["points"] = [float(v) for v in chain.points.ravel(order="C")]
        doc["jumps"] = [float(v) for v in chain.jumps]
    return doc


def graph_from_doc(doc: dict) -> tuple[Optional[Graph], int, Optional[LatentChain]]:
    """Inverse of :func:`graph_to_doc`; validates invariants on load."""
    if doc.get("schema") != _SCHEMA:
        raise ValueError(f"unrecognized graph container schema {doc.get('schema')!r}")
    n = int(doc["n"])
    d = int(doc["d"])
    graph = None
    if doc.get("adjacency") is not None:
        raw = base64.b64decode(doc["adjacency"])
        row_bytes = (n + 7) // 8
        packed = np.frombuffer(raw, dtype=np.uint8).reshape(n, row_bytes)
        adjacency = np.unpackbits(packed, axis=1, bitorder="big")[:, :n].astype(np.uint8)
        graph = Graph(adjacency=adjacency, zeta=float(doc["zeta"]), seed=doc.get("seed"))
        graph.validate()
    chain = None
    if doc.get("points") is not None:
        points = np.asarray(doc["points"], dtype=float).reshape(n, d)
        jumps = np.asarray(doc.get("jumps") or [], dtype=float)
        chain = LatentChain(points=points, jumps=jumps, seed=doc.get("seed"))
        chain.validate()
    return graph, d, chain


def save_graph(path, graph: Optional[Graph], d: int, chain: Optional[LatentChain] = None) -> None:
    doc = graph_to_doc(graph, d, chain)
    with open(path, "w", encoding="ascii") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_graph(path) -> tuple[Optional[Graph], int, Optional[LatentChain]]:
    with open(path, "r", encoding="ascii") as fh:
        doc = json.load(fh)
    return graph_from_doc(doc)
