"""Markov random geometric graphs on the sphere.

Simulation of the Markovian latent dynamic and its random graph,
nonparametric spectral estimation of the envelope and latitude functions from
a single adjacency matrix, link prediction through the posterior connection
probability, and a calibrated test for Markovian dynamics.
"""

from .harmonics import (
    EnvelopeSpectrum,
    cumulative_dim,
    envelope_spectrum,
    gegenbauer,
    harmonic_dim,
    reconstruct_envelope,
    sobolev_norm,
)
from .dynamics import (
    ConstantEnvelope,
    GegenbauerEnvelope,
    Graph,
    HeavisideEnvelope,
    LatentChain,
    LatitudeDistribution,
    beta_mixture,
    custom_latitude,
    latitude_pdf,
    load_graph,
    replicate_rng,
    sample_chain,
    sample_graph,
    sample_uniform_orthogonal,
    save_graph,
    scaled_beta,
    uniform_latitude,
)
from .spectral import Spectrum, rearrangement_distance, scaled_adjacency, sym_eigen
from .envelope import (
    ClusterAssignment,
    DendrogramNode,
    EnvelopeEstimate,
    complete_linkage_tree,
    estimate_envelope,
    intra_class_variance,
    select_resolution,
    size_constrained_clustering,
)
from .latitude import (
    GramEstimate,
    LatitudeDensity,
    estimate_gram,
    fit_latitude,
    isolation_gap,
    superdiagonal_distances,
    true_gram,
)
from .inference import (
    ClassifierOutput,
    LinkPosterior,
    TestPipeline,
    TestReport,
    calibrate_threshold,
    chi2_statistic,
    classifier_risk,
    classify,
    estimate_latitude_density,
    link_posterior,
    link_posterior_profile,
    markov_test,
    random_classifier,
)
from .config import ConfigError, ExperimentConfig, load_config

__version__ = "0.1.0"
