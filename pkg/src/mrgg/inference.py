"""Link prediction and the Markovian-dynamics hypothesis test.

Link prediction: given the pairwise latent distances, the probability that an
incoming node connects to node i is a double integral of the envelope along
one more latitude jump; thresholding it at 1/2 gives the optimal classifier,
and plugging in the estimated envelope/latitude gives its empirical version.

Dynamics test: under the null the latent points are independent and uniform,
so the jump-distance density equals the uniform jump law. The test estimates
that density from one graph, resamples a batch, and compares it to the null
law with a chi-squared statistic whose rejection threshold is calibrated by
Monte Carlo under the null.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import (
    Graph,
    LatitudeDistribution,
    as_rng,
    replicate_rng,
    sample_chain,
    sample_graph,
    uniform_latitude,
)
from .latitude import LatitudeDensity, estimate_gram, fit_latitude, superdiagonal_distances
from .spectral import VALUE_DESC, scaled_adjacency, sym_eigen

__all__ = [
    "LinkPosterior",
    "ClassifierOutput",
    "TestReport",
    "link_posterior",
    "link_posterior_profile",
    "classify",
    "random_classifier",
    "classifier_risk",
    "chi2_statistic",
    "estimate_latitude_density",
    "latitude_test_statistic",
    "TestPipeline",
    "threshold_from_statistics",
    "calibrate_threshold",
    "null_rejection_rate",
    "markov_test",
]

ORACLE = "oracle"
PLUGIN = "plugin"
UNIFORM = "uniform"


@dataclass(frozen=True)
class LinkPosterior:
    """Connection probabilities of the incoming node against each present node."""

    eta: np.ndarray
    source: str  # "oracle" (true envelope/latitude), "plugin" (estimates), "uniform" (null latitude)

    def __post_init__(self):
        eta = np.atleast_1d(np.asarray(self.eta, dtype=float))
        if np.any((eta < 0) | (eta > 1)):
            raise ValueError("posterior probabilities must lie in [0, 1]")
        object.__setattr__(self, "eta", eta)


@dataclass(frozen=True)
class ClassifierOutput:
    """0/1 connection guesses for the incoming node."""

    labels: np.ndarray
    kind: str  # "bayes", "mrgg", "random"


@dataclass(frozen=True)
class TestReport:
    """Outcome of the dynamics test: reject means a Markovian (non-uniform) dynamic."""

    statistic: float
    threshold: float
    alpha: float
    reject: bool
    mc_trials: int
    bins: int
    valid: bool = True

    def to_doc(self) -> dict:
        return {
            "statistic": float(self.statistic),
            "threshold": float(self.threshold),
            "alpha": float(self.alpha),
            "reject": bool(self.reject),
            "mc_trials": int(self.mc_trials),
            "bins": int(self.bins),
            "valid": bool(self.valid),
        }


# ---------------------------------------------------------------------------
# link prediction


def link_posterior(r_in: float, envelope, latitude_pdf, nodes: int = 64) -> float:
    """Posterior connection probability for one node at latent distance ``r_in``.

    Tensor Gauss-Legendre quadrature of
    integral over (r, u) in [-1,1]^2 of
    p(r_in*r + sqrt(1-r^2)*sqrt(1-r_in^2)*u) * f(r) dr du/2,
    clamped into [0, 1].
    """
    return float(link_posterior_profile(np.array([r_in]), envelope, latitude_pdf, nodes)[0])


def link_posterior_profile(r_in, envelope, latitude_pdf, nodes: int = 64) -> np.ndarray:
    """Vectorized posterior for an array of latent distances (shared quadrature grid)."""
    r_in = np.atleast_1d(np.asarray(r_in, dtype=float))
    if np.any(np.abs(r_in) > 1.0):
        raise ValueError("latent distances must lie in [-1, 1]")
    x, w = np.polynomial.legendre.leggauss(nodes)
    f_vals = np.asarray(latitude_pdf(x), dtype=float)
    if not np.all(np.isfinite(f_vals)):
        raise ValueError("latitude density evaluated to a non-finite value")
    # argument grid: (len(r_in), nodes_r, nodes_u)
    sin_in = np.sqrt(np.clip(1.0 - r_in**2, 0.0, None))
    sin_r = np.sqrt(np.clip(1.0 - x**2, 0.0, None))
    arg = (
        r_in[:, None, None] * x[None, :, None]
        + sin_in[:, None, None] * sin_r[None, :, None] * x[None, None, :]
    )
    p_vals = np.asarray(envelope(np.clip(arg, -1.0, 1.0)), dtype=float)
    if not np.all(np.isfinite(p_vals)):
        raise ValueError("envelope evaluated to a non-finite value")
    inner = p_vals @ (w / 2.0)  # integrate over u
    eta = inner @ (w * f_vals)  # integrate over r
    return np.clip(eta, 0.0, 1.0)


def classify(posterior: LinkPosterior) -> ClassifierOutput:
    """Threshold-at-1/2 labels; ties (eta exactly 1/2) label as connected."""
    labels = (posterior.eta >= 0.5).astype(int)
    kind = "bayes" if posterior.source == ORACLE else "mrgg"
    return ClassifierOutput(labels=labels, kind=kind)


def random_classifier(g: Graph, rng) -> ClassifierOutput:
    """Independent Bernoulli guesses at the graph's observed edge density."""
    if g.n < 2:
        raise ValueError("need at least two nodes")
    rng = as_rng(rng)
    labels = (rng.random(g.n) < g.density()).astype(int)
    return ClassifierOutput(labels=labels, kind="random")


def classifier_risk(posterior: LinkPosterior, out: ClassifierOutput) -> float:
    """Expected misclassification rate of the labels against the given posterior."""
    eta = posterior.eta
    labels = np.asarray(out.labels)
    if labels.shape != eta.shape:
        raise ValueError("posterior and labels must have matching lengths")
    return float(np.mean(np.where(labels == 1, 1.0 - eta, eta)))


# ---------------------------------------------------------------------------
# chi-squared dynamics test


def chi2_statistic(samples, f0, bins: int) -> float:
    """Goodness-of-fit statistic of ``samples`` against the density ``f0`` on (-1, 1).

    Equal-width bins; expected counts are computed by per-bin Gauss-Legendre
    quadrature of ``f0``. Configurations with a vanishing expected count are
    rejected.
    """
    samples = np.asarray(samples, dtype=float)
    if bins < 2:
        raise ValueError("need at least 2 bins")
    edges = np.linspace(-1.0, 1.0, bins + 1)
    observed, _ = np.histogram(samples, bins=edges)
    x, w = np.polynomial.legendre.leggauss(16)
    half = np.diff(edges) / 2.0
    mid = (edges[:-1] + edges[1:]) / 2.0
    pts = mid[:, None] + half[:, None] * x[None, :]
    masses = (np.asarray(f0(pts.ravel()), dtype=float).reshape(bins, -1) @ w) * half
    expected = samples.size * masses
    if np.any(expected < 1e-12):
        raise ValueError("an expected bin count vanishes; use fewer bins or another reference")
    return float(np.sum((observed - expected) ** 2 / expected))


def estimate_latitude_density(
    g: Graph, d: int, bandwidth: Optional[float] = None
) -> tuple[LatitudeDensity, np.ndarray]:
    """Latitude density estimated from one graph; also returns the raw distances."""
    spec = sym_eigen(scaled_adjacency(g), want_vectors=True, order=VALUE_DESC)
    gram = estimate_gram(spec, d)
    distances = superdiagonal_distances(gram)
    return fit_latitude(distances, bandwidth=bandwidth), distances


def latitude_test_statistic(
    g: Graph,
    d: int,
    rng,
    bins: int = 70,
    reuse_distances: bool = False,
    bandwidth: Optional[float] = None,
) -> float:
    """Chi-squared statistic of the estimated latitude against the uniform null law.

    A batch of size n is resampled from the fitted density by inverse CDF
    (or, with ``reuse_distances``, the raw superdiagonal estimates are binned
    directly) and compared to the jump law of independent uniform points.
    """
    density, distances = estimate_latitude_density(g, d, bandwidth=bandwidth)
    if reuse_distances:
        batch = distances
    else:
        batch = density.sample(g.n, as_rng(rng))
    null_pdf = uniform_latitude(d).pdf
    return chi2_statistic(batch, null_pdf, bins)


@dataclass(frozen=True)
class TestPipeline:
    """Plain-data description of the simulation/test pipeline for Monte Carlo runs.

    ``envelope`` names a built-in ("heaviside" or "constant") or carries
    Gegenbauer coefficients; kept as data so trials can cross process
    boundaries.
    """

    envelope: str = "heaviside"
    envelope_level: float = 0.5
    envelope_coefficients: Optional[tuple] = None
    latitude: str = "uniform"  # "uniform" | "beta-mixture" | "scaled-beta"
    latitude_params: tuple = ()
    zeta: float = 1.0
    bins: int = 70
    reuse_distances: bool = False
    bandwidth: Optional[float] = None

    def build_envelope(self, d: int):
        from .dynamics import ConstantEnvelope, GegenbauerEnvelope, HeavisideEnvelope
        from .harmonics import EnvelopeSpectrum

        if self.envelope == "heaviside":
            return HeavisideEnvelope()
        if self.envelope == "constant":
            return ConstantEnvelope(self.envelope_level)
        if self.envelope == "gegenbauer":
            return GegenbauerEnvelope(
                EnvelopeSpectrum(np.asarray(self.envelope_coefficients, dtype=float), d)
            )
        raise ValueError(f"unknown envelope {self.envelope!r}")

    def build_latitude(self, d: int) -> LatitudeDistribution:
        from .dynamics import beta_mixture, scaled_beta

        if self.latitude == "uniform":
            return uniform_latitude(d)
        if self.latitude == "beta-mixture":
            return beta_mixture(*self.latitude_params)
        if self.latitude == "scaled-beta":
            return scaled_beta(*self.latitude_params)
        raise ValueError(f"unknown latitude {self.latitude!r}")


def _trial_statistic(args) -> float:
    pipeline, n, d, master_seed, index, null = args
    rng = replicate_rng(master_seed, index)
    lat = uniform_latitude(d) if null else pipeline.build_latitude(d)
    chain = sample_chain(n, d, lat, rng)
    g = sample_graph(chain, pipeline.build_envelope(d), zeta=pipeline.zeta, seed=rng)
    return latitude_test_statistic(
        g,
        d,
        rng,
        bins=pipeline.bins,
        reuse_distances=pipeline.reuse_distances,
        bandwidth=pipeline.bandwidth,
    )


def _run_trials(tasks, jobs: int) -> list[float]:
    from .pool import parallel_map

    return parallel_map(_trial_statistic, tasks, jobs)


def threshold_from_statistics(statistics, alpha: float) -> float:
    """Empirical (1 - alpha) quantile with higher interpolation on ties."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"level must lie in (0, 1], got {alpha!r}")
    return float(np.quantile(np.asarray(statistics, dtype=float), 1.0 - alpha, method="higher"))


def calibrate_threshold(
    n: int,
    d: int,
    alpha: float,
    trials: int,
    pipeline: TestPipeline,
    seed: int,
    jobs: int = 1,
) -> float:
    """Rejection threshold from Monte Carlo simulation under the null.

    Simulates ``trials`` graphs with independent uniform latent points, runs
    the full estimation + batch + chi-squared pipeline on each, and returns
    the empirical (1 - alpha) quantile (higher interpolation on ties).
    """
    if trials < 50:
        raise ValueError("threshold calibration needs at least 50 trials")
    tasks = [(pipeline, n, d, seed, t, True) for t in range(trials)]
    stats = _run_trials(tasks, jobs)
    return threshold_from_statistics(stats, alpha)


def null_rejection_rate(
    n: int,
    d: int,
    threshold: float,
    trials: int,
    pipeline: TestPipeline,
    seed: int,
    jobs: int = 1,
    null: bool = True,
) -> float:
    """Monte Carlo rejection rate of the calibrated test (under null or alternative)."""
    tasks = [(pipeline, n, d, seed, t, null) for t in range(trials)]
    stats = np.asarray(_run_trials(tasks, jobs))
    return float(np.mean(stats > threshold))


def markov_test(
    g: Graph,
    d: int,
    alpha: float,
    threshold: float,
    rng=None,
    bins: int = 70,
    reuse_distances: bool = False,
    bandwidth: Optional[float] = None,
    mc_trials: int = 0,
) -> TestReport:
    """Test one graph for a Markovian latent dynamic against the uniform null.

    Rejects when the chi-squared statistic of the estimated latitude exceeds
    the supplied calibrated threshold. Estimation failures yield a report
    flagged invalid instead of raising.
    """
    try:
        statistic = latitude_test_statistic(
            g, d, as_rng(rng), bins=bins, reuse_distances=reuse_distances, bandwidth=bandwidth
        )
    except (ValueError, np.linalg.LinAlgError):
        return TestReport(
            statistic=float("nan"),
            threshold=threshold,
            alpha=alpha,
            reject=False,
            mc_trials=mc_trials,
            bins=bins,
            valid=False,
        )
    return TestReport(
        statistic=statistic,
        threshold=threshold,
        alpha=alpha,
        reject=bool(statistic > threshold),
        mc_trials=mc_trials,
        bins=bins,
    )
