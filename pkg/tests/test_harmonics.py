import numpy as np
import pytest

from mrgg.harmonics import (
    EnvelopeSpectrum,
    cumulative_dim,
    envelope_spectrum,
    gegenbauer,
    harmonic_dim,
    reconstruction_coefficient,
    reconstruct_envelope,
    sobolev_norm,
    weight_normalizer,
)
from mrgg.dynamics import HeavisideEnvelope

# explicit closed forms, independent of the recurrence under test
LEGENDRE = [
    lambda t: np.ones_like(t),
    lambda t: t,
    lambda t: (3 * t**2 - 1) / 2,
    lambda t: (5 * t**3 - 3 * t) / 2,
    lambda t: (35 * t**4 - 30 * t**2 + 3) / 8,
    lambda t: (63 * t**5 - 70 * t**3 + 15 * t) / 8,
    lambda t: (231 * t**6 - 315 * t**4 + 105 * t**2 - 5) / 16,
]


@pytest.mark.parametrize(
    "l,d,expected",
    [(0, 3, 1), (1, 5, 5), (2, 3, 5), (1, 3, 3), (3, 3, 7), (2, 4, 9)],
)
def test_harmonic_dim(l, d, expected):
    assert harmonic_dim(l, d) == expected


def test_harmonic_dim_rejects_low_dimension():
    with pytest.raises(ValueError):
        harmonic_dim(2, 2)
    with pytest.raises(ValueError):
        harmonic_dim(-1, 3)


@pytest.mark.parametrize("R,d,expected", [(0, 3, 1), (2, 3, 9), (1, 4, 5)])
def test_cumulative_dim(R, d, expected):
    assert cumulative_dim(R, d) == expected


def test_cumulative_dim_closed_form_d3():
    for R in range(51):
        assert cumulative_dim(R, 3) == (R + 1) ** 2


def test_gegenbauer_degree_zero_and_one():
    assert gegenbauer(0, 0.5, 0.73) == 1.0
    assert gegenbauer(1, 0.5, 0.4) == pytest.approx(0.4, abs=1e-15)
    assert gegenbauer(2, 0.5, 0.0) == pytest.approx(-0.5, abs=1e-15)


def test_gegenbauer_matches_legendre():
    grid = np.linspace(-1.0, 1.0, 101)
    for k, poly in enumerate(LEGENDRE):
        assert np.max(np.abs(gegenbauer(k, 0.5, grid) - poly(grid))) < 1e-12


@pytest.mark.parametrize("d", [3, 4, 6])
def test_gegenbauer_sup_norm_at_one(d):
    beta = (d - 2) / 2.0
    grid = np.linspace(-1.0, 1.0, 501)
    for k in range(11):
        at_one = gegenbauer(k, beta, 1.0)
        assert np.max(np.abs(gegenbauer(k, beta, grid))) <= at_one + 1e-12
        ratio = harmonic_dim(k, d) / reconstruction_coefficient(k, d)
        assert at_one == pytest.approx(ratio, rel=1e-9)


@pytest.mark.parametrize("d", [3, 5])
def test_gegenbauer_quadrature_orthogonality(d):
    beta = (d - 2) / 2.0
    nodes, weights = np.polynomial.legendre.leggauss(64)
    w_beta = (1 - nodes**2) ** (beta - 0.5)
    vals = [gegenbauer(k, beta, nodes) for k in range(7)]
    for j in range(7):
        for k in range(j + 1, 7):
            assert abs(np.sum(weights * vals[j] * vals[k] * w_beta)) < 1e-10


def test_envelope_spectrum_constant():
    spec = envelope_spectrum(lambda t: np.ones_like(t), d=3, R=2)
    assert spec.coefficients == pytest.approx([1.0, 0.0, 0.0], abs=1e-12)


def test_envelope_spectrum_heaviside_first_coefficients():
    # oracle: 128-node quadrature with explicit Legendre factors
    nodes, weights = np.polynomial.legendre.leggauss(128)
    ind = (nodes >= 0).astype(float)
    oracle0 = 0.5 * np.sum(weights * ind)
    oracle1 = (3 * 0.5 / 3) * np.sum(weights * ind * nodes)
    spec = envelope_spectrum(HeavisideEnvelope(), d=3, R=1, quad_nodes=128)
    assert spec.coefficients[0] == pytest.approx(oracle0, abs=1e-12)
    assert spec.coefficients[1] == pytest.approx(oracle1, abs=1e-12)
    assert spec.coefficients[0] == pytest.approx(0.5, abs=1e-12)
    assert spec.coefficients[1] == pytest.approx(0.25, abs=1e-4)


def test_envelope_spectrum_rejects_bad_input():
    with pytest.raises(ValueError):
        envelope_spectrum(lambda t: np.full_like(t, np.nan), d=3, R=1)
    with pytest.raises(ValueError):
        envelope_spectrum(lambda t: np.ones_like(t), d=3, R=10, quad_nodes=8)


def test_band_limited_round_trip():
    truth = EnvelopeSpectrum([0.5, 0.2, 0.05, 0.01], d=3)
    profile = lambda t: reconstruct_envelope(truth, t, clip=False)
    recovered = envelope_spectrum(profile, d=3, R=3)
    grid = np.linspace(-1.0, 1.0, 201)
    assert np.max(np.abs(reconstruct_envelope(recovered, grid) - profile(grid))) < 1e-8


def test_reconstruct_envelope_examples():
    spec = EnvelopeSpectrum([1.0, 0.0, 0.0], d=3)
    assert reconstruct_envelope(spec, [-1.0, 0.0, 1.0]) == pytest.approx([1.0, 1.0, 1.0])
    spec = EnvelopeSpectrum([0.5, 0.25], d=3)
    assert reconstruct_envelope(spec, [1.0])[0] == pytest.approx(1.25)
    assert reconstruct_envelope(spec, [1.0], clip=True)[0] == pytest.approx(1.0)


def test_reconstruct_envelope_rejects_out_of_range_grid():
    with pytest.raises(ValueError):
        reconstruct_envelope(EnvelopeSpectrum([1.0], d=3), [1.5])


def test_sobolev_norm_examples():
    assert sobolev_norm(EnvelopeSpectrum([0.0], d=3), s=1.0) == 0.0
    assert sobolev_norm(EnvelopeSpectrum([1.0, 0.0, 0.0], d=3), s=1.0) == pytest.approx(1.0)
    assert sobolev_norm(EnvelopeSpectrum([0.0, 1.0], d=3), s=1.0) == pytest.approx(3.0)


def test_weight_normalizer_d3():
    assert weight_normalizer(3) == pytest.approx(0.5, abs=1e-14)
