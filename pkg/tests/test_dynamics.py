import json

import numpy as np
import pytest
from scipy.stats import kstest

from mrgg.dynamics import (
    ConstantEnvelope,
    HeavisideEnvelope,
    beta_mixture,
    custom_latitude,
    graph_from_doc,
    graph_to_doc,
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


def test_orthogonal_sample_is_orthogonal_and_unit():
    rng = np.random.default_rng(0)
    e3 = np.array([0.0, 0.0, 1.0])
    for _ in range(50):
        y = sample_uniform_orthogonal(e3, rng)
        assert abs(y[2]) < 1e-12
        assert abs(np.linalg.norm(y) - 1.0) < 1e-12


def test_orthogonal_sample_symmetric_mean():
    rng = np.random.default_rng(1)
    e3 = np.array([0.0, 0.0, 1.0])
    draws = np.array([sample_uniform_orthogonal(e3, rng)[0] for _ in range(100_000)])
    assert abs(draws.mean()) < 0.02


def test_single_point_chain():
    chain = sample_chain(1, 3, uniform_latitude(3), seed=0)
    assert chain.points.shape == (1, 3)
    assert chain.jumps.size == 0
    assert abs(np.linalg.norm(chain.points[0]) - 1.0) < 1e-12


def test_chain_invariants_and_reproducibility():
    lat = beta_mixture(2, 2)
    a = sample_chain(200, 4, lat, seed=5)
    b = sample_chain(200, 4, lat, seed=5)
    a.validate()
    assert np.array_equal(a.points, b.points)
    assert np.array_equal(a.jumps, b.jumps)
    dots = np.sum(a.points[:-1] * a.points[1:], axis=1)
    assert np.max(np.abs(dots - a.jumps)) < 1e-10


def test_uniform_latitude_jump_law():
    chain = sample_chain(1000, 3, uniform_latitude(3), seed=3)
    # under the uniform law for d=3 the jump is uniform on [-1, 1]
    stat = kstest(chain.jumps, lambda t: (t + 1) / 2).statistic
    assert stat < 0.06


def test_point_mass_latitude_freezes_the_chain():
    lat = custom_latitude(pdf=lambda r: np.zeros_like(r), sampler=lambda size, rng: np.ones(size))
    chain = sample_chain(50, 3, lat, seed=2)
    assert np.max(np.abs(chain.points - chain.points[0])) < 1e-10


def test_stationarity_of_uniform_marginal():
    # the uniform law is invariant: a fixed coordinate of X_5 averages to 0
    lat = beta_mixture(2, 2)
    reps = 10_000
    coords = np.empty(reps)
    for i in range(reps):
        coords[i] = sample_chain(5, 3, lat, seed=replicate_rng(99, i)).points[-1][0]
    se = 1.0 / np.sqrt(3 * reps)  # coordinate variance is 1/d on the sphere
    assert abs(coords.mean()) < 3 * se


def test_graph_trivial_envelopes():
    chain = sample_chain(40, 3, uniform_latitude(3), seed=0)
    empty = sample_graph(chain, ConstantEnvelope(0.0), seed=1)
    assert empty.adjacency.sum() == 0
    complete = sample_graph(chain, ConstantEnvelope(1.0), seed=1)
    assert complete.adjacency.sum() == 40 * 39
    complete.validate()


def test_graph_rejects_bad_envelope():
    chain = sample_chain(10, 3, uniform_latitude(3), seed=0)
    with pytest.raises(ValueError):
        sample_graph(chain, lambda t: np.full_like(np.asarray(t, float), 1.5), seed=1)
    with pytest.raises(ValueError):
        sample_graph(chain, HeavisideEnvelope(), zeta=0.0, seed=1)


def test_heaviside_mean_degree():
    chain = sample_chain(500, 3, uniform_latitude(3), seed=7)
    g = sample_graph(chain, HeavisideEnvelope(), seed=8)
    mean_degree = g.adjacency.sum(axis=1).mean()
    assert abs(mean_degree / (g.n - 1) - 0.5) < 0.04


def test_sparse_regime_degree_scaling():
    n = 2000
    zeta = np.log(n) ** 2 / n
    chain = sample_chain(n, 3, uniform_latitude(3), seed=21)
    g = sample_graph(chain, HeavisideEnvelope(), zeta=zeta, seed=22)
    ratio = g.adjacency.sum(axis=1).mean() / (zeta * n * 0.5)
    assert 0.8 <= ratio <= 1.2


def test_graph_reproducibility():
    chain = sample_chain(60, 3, beta_mixture(2, 2), seed=4)
    g1 = sample_graph(chain, HeavisideEnvelope(), seed=11)
    g2 = sample_graph(chain, HeavisideEnvelope(), seed=11)
    assert np.array_equal(g1.adjacency, g2.adjacency)


@pytest.mark.parametrize(
    "lat,r,expected",
    [
        (uniform_latitude(3), 0.3, 0.5),
        (beta_mixture(2, 2), 0.0, 0.0),
        (beta_mixture(2, 2), 0.5, 0.75),
        (beta_mixture(2, 2), -0.5, 0.75),
    ],
)
def test_latitude_pdf_values(lat, r, expected):
    assert latitude_pdf(lat, r) == pytest.approx(expected, abs=1e-12)


def test_latitude_pdf_rejects_out_of_range():
    with pytest.raises(ValueError):
        latitude_pdf(uniform_latitude(3), 1.5)


@pytest.mark.parametrize(
    "lat",
    [uniform_latitude(3), uniform_latitude(5), beta_mixture(2, 2), scaled_beta(5, 1)],
)
def test_builtin_latitudes_are_densities(lat):
    lat.validate()


def test_latitude_samplers_match_pdfs():
    rng = np.random.default_rng(0)
    for lat in (beta_mixture(2, 2), scaled_beta(5, 1), uniform_latitude(4)):
        draws = lat.sample(20_000, rng)
        grid = np.linspace(-1, 1, 2001)
        cdf = np.cumsum(lat.pdf(grid)) * (grid[1] - grid[0])
        cdf /= cdf[-1]
        stat = kstest(draws, lambda t: np.interp(t, grid, cdf)).statistic
        assert stat < 0.02


def test_serialization_round_trip(tmp_path):
    lat = beta_mixture(2, 2)
    chain = sample_chain(30, 3, lat, seed=9)
    g = sample_graph(chain, HeavisideEnvelope(), zeta=0.8, seed=10)
    path = tmp_path / "graph.json"
    save_graph(path, g, 3, chain)
    g2, d, chain2 = load_graph(path)
    assert d == 3
    assert np.array_equal(g.adjacency, g2.adjacency)
    assert g2.zeta == 0.8
    assert np.allclose(chain.points, chain2.points)
    assert np.allclose(chain.jumps, chain2.jumps)

    # byte determinism of the container
    doc = graph_to_doc(g, 3, chain)
    assert json.dumps(doc, sort_keys=True) == json.dumps(graph_to_doc(g, 3, chain), sort_keys=True)


def test_deserialization_validates():
    chain = sample_chain(12, 3, uniform_latitude(3), seed=1)
    g = sample_graph(chain, ConstantEnvelope(0.5), seed=2)
    doc = graph_to_doc(g, 3, chain)
    doc["schema"] = "bogus"
    with pytest.raises(ValueError):
        graph_from_doc(doc)
