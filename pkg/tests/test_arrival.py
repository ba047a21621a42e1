import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from timelab import (arrival_density, covariance_residual, gaussian_packet, make_grid, moments,
                     smeared_overlap, wigner_margin)
from timelab.arrival import sector_weights, tail_coefficient
from timelab.errors import ConfigurationError, CoverageWarning, UndefinedMomentsError

GRID = make_grid(4096, -200, 200)


@pytest.fixture(scope="module")
def packet():
    return gaussian_packet(GRID, -10.0, 2.0, 1.0)


@pytest.fixture(scope="module")
def dist(packet):
    return arrival_density(packet, 1.0, (-60, 60), 4096)


def _mean_inverse_momentum(p0, sigma_p, p_min):
    # <1/p> over |phi|^2 restricted to momenta that arrive inside the window
    def w(p):
        return np.exp(-(p - p0) ** 2 / (2 * sigma_p ** 2))
    norm = quad(w, p_min, np.inf)[0]
    return quad(lambda p: w(p) / p, p_min, np.inf)[0] / norm


def test_density_is_normalized_and_nonnegative(dist):
    assert np.all(dist.density >= 0)
    assert dist.captured_mass == pytest.approx(1.0, abs=2e-4)
    assert dist.completed_mass == pytest.approx(1.0, abs=1e-4)


def test_mean_arrival_matches_classical_oracle(dist):
    # classical arrival m|x0|/p; slower momenta arrive after T = 60
    oracle = 10.0 * _mean_inverse_momentum(2.0, 0.5, 10.0 / 60)
    assert oracle == pytest.approx(5.40, abs=0.01)
    assert moments(dist)["mean"] == pytest.approx(oracle, rel=1e-3)


def test_mirror_image_has_the_same_distribution(dist):
    mirror = arrival_density(gaussian_packet(GRID, 10.0, -2.0, 1.0), 1.0, (-60, 60), 4096)
    np.testing.assert_allclose(mirror.density, dist.density, atol=1e-12 * dist.density.max())


def test_sector_weights(packet):
    w = sector_weights(packet, 1.0, (-60, 60), 4096)
    assert w[1] == pytest.approx(1.0, abs=2e-4)
    assert w[-1] < 1e-4


def test_large_time_tail_follows_three_halves_law():
    g = make_grid(4096, -1024, 1024)
    slow = gaussian_packet(g, -2.0, 0.5, 1.0)
    C = tail_coefficient(slow, 1.0)
    T = np.array([-400.0, 400.0])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CoverageWarning)
        rho = arrival_density(slow, 1.0, (-400, 400), 2).density
    np.testing.assert_allclose(rho * np.abs(T) ** 1.5 / C, 1.0, rtol=0.05)


def test_completed_mass_requires_straddling_window(packet):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CoverageWarning)
        d = arrival_density(packet, 1.0, (1.0, 20.0), 512)
    assert d.completed_mass is None and d.tail_mass() is None


def test_default_window_and_errors(packet):
    d = arrival_density(packet, 1.0)
    assert d.captured_mass > 0.99
    with pytest.raises(ConfigurationError):
        arrival_density(packet, -1.0)
    with pytest.raises(ConfigurationError):
        arrival_density(packet, 1.0, (5, 1))
    with pytest.raises(ConfigurationError):
        arrival_density(gaussian_packet(GRID, -10.0, 0.0, 1.0), 1.0)
    with pytest.warns(CoverageWarning):
        arrival_density(packet, 1.0, (4.0, 5.0), 64)


def test_moments_need_mass(packet):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CoverageWarning)
        d = arrival_density(packet, 1.0, (-60, -50), 16)
    with pytest.raises(UndefinedMomentsError):
        moments(type(d)(d.T_samples, np.zeros_like(d.density), d.m))


def test_wigner_margin_about_any_reference(packet, dist):
    at_mean = wigner_margin(packet, dist)
    assert at_mean > 1
    assert wigner_margin(packet, dist, t_ref=0.0) > at_mean


@settings(max_examples=8, deadline=None)
@given(st.floats(-3, 3))
def test_time_covariance(t):
    g = make_grid(1024, -150, 150)
    psi = gaussian_packet(g, -12.0, 1.5, 1.5)
    window = (8.0 - t - 10, 8.0 - t + 14)
    assert covariance_residual(psi, t, 1.0, window, 512) < 1e-9


def test_smeared_overlap_diagonal_and_sectors():
    w = 0.5
    peak = 1 / (np.sqrt(2 * np.pi) * w)
    assert smeared_overlap(2.0, 2.0, 1, 1, w).real == pytest.approx(peak / 2, rel=1e-10)
    assert smeared_overlap(2.0, 2.0, 1, -1, w) == 0
    with pytest.raises(ConfigurationError):
        smeared_overlap(0.0, 0.0, 1, 1, 0.0)


@settings(max_examples=20, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5))
def test_smeared_overlap_is_hermitian(T, Tp):
    a = smeared_overlap(T, Tp, 1, 1, 0.3)
    b = smeared_overlap(Tp, T, 1, 1, 0.3)
    assert abs(a - np.conj(b)) < 1e-12


def test_smeared_overlap_matches_closed_form():
    # int_0^inf exp(i s E - w^2 E^2 / 2) dE / 2pi
    from scipy.special import erfc
    w, s = 0.4, 1.3
    z = -1j * s / (np.sqrt(2) * w)
    exact = np.sqrt(np.pi / 2) / w * np.exp(z ** 2) * erfc(z) / (2 * np.pi)
    assert smeared_overlap(0.0, s, 1, 1, w) == pytest.approx(exact, abs=1e-10)
