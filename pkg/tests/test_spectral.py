import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from timelab import (TwoBodyState, WaveState, expectation, gaussian_packet, inner_product,
                     make_grid, spread, transform)
from timelab.errors import ConfigurationError, GeneralizedStateError, ShapeError
from timelab.spectral import MOMENTUM, POSITION

SMALL = make_grid(64, -10.0, 10.0)


def test_grid_rejects_bad_sizes():
    with pytest.raises(ConfigurationError) as exc:
        make_grid(100, -1, 1)
    assert exc.value.field == "n_points"
    with pytest.raises(ConfigurationError):
        make_grid(64, 1, 1)
    with pytest.raises(ConfigurationError):
        make_grid(64, 0, np.inf)


def test_momentum_lattice_is_half_bin_offset():
    g = make_grid(8, 0.0, 8.0)
    assert g.dp == pytest.approx(np.pi / 4)
    np.testing.assert_allclose(g.p, np.pi / 8 * np.array([-7, -5, -3, -1, 1, 3, 5, 7]))
    assert not np.any(g.p == 0)
    assert g.dx * g.dp * g.n_points == pytest.approx(2 * np.pi)


complex_arrays = arrays(np.complex128, 64, elements=st.complex_numbers(
    max_magnitude=1e3, allow_nan=False, allow_infinity=False))


@settings(max_examples=50, deadline=None)
@given(complex_arrays)
def test_transform_is_unitary_and_invertible(a):
    psi = WaveState(SMALL, POSITION, a)
    phi = transform(psi, MOMENTUM)
    assert phi.norm() == pytest.approx(psi.norm(), rel=1e-12, abs=1e-12)
    np.testing.assert_allclose(transform(phi, POSITION).amplitudes, a, atol=1e-9 * (1 + np.abs(a).max()))


@settings(max_examples=30, deadline=None)
@given(complex_arrays, complex_arrays, st.complex_numbers(max_magnitude=10, allow_nan=False,
                                                          allow_infinity=False))
def test_inner_product_is_sesquilinear_and_basis_free(a, b, c):
    phi, psi = WaveState(SMALL, POSITION, a), WaveState(SMALL, POSITION, b)
    scaled = WaveState(SMALL, POSITION, c * b)
    base = inner_product(phi, psi)
    scale = 1 + abs(base) + np.abs(a).max() * np.abs(b).max()
    assert abs(inner_product(phi, scaled) - c * base) <= 1e-9 * scale * (1 + abs(c))
    assert abs(inner_product(psi, phi) - np.conj(base)) <= 1e-9 * scale
    assert abs(inner_product(transform(phi, MOMENTUM), psi) - base) <= 1e-9 * scale


def test_gaussian_momentum_amplitude_matches_closed_form():
    g = make_grid(1024, -40, 40)
    x0, p0, sigma = -3.0, 1.5, 1.2
    phi = gaussian_packet(g, x0, p0, sigma).to(MOMENTUM)
    p = g.p
    exact = ((2 * sigma ** 2 / np.pi) ** 0.25 * np.exp(-sigma ** 2 * (p - p0) ** 2)
             * np.exp(-1j * (p - p0) * x0))
    # the global phase exp(i p0 x0) is convention; compare up to it
    ratio = inner_product(WaveState(g, MOMENTUM, exact), phi)
    assert abs(ratio) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(phi.amplitudes, ratio * exact, atol=1e-12)


def test_gaussian_moments():
    g = make_grid(2048, -60, 60)
    x0, p0, sigma, m = 4.0, -2.0, 1.5, 2.0
    psi = gaussian_packet(g, x0, p0, sigma)
    assert psi.norm() == pytest.approx(1.0, abs=1e-14)
    assert expectation(psi, "x") == pytest.approx(x0, abs=1e-10)
    assert expectation(psi, "p") == pytest.approx(p0, abs=1e-10)
    sigma_p = 1 / (2 * sigma)
    assert expectation(psi, "kinetic", m) == pytest.approx((p0 ** 2 + sigma_p ** 2) / (2 * m))
    assert spread(psi, "x") == pytest.approx(sigma, rel=1e-10)
    assert spread(psi, "p") == pytest.approx(sigma_p, rel=1e-10)


def test_expectation_errors():
    psi = gaussian_packet(SMALL, 0.0, 0.0, 1.0)
    with pytest.raises(ConfigurationError):
        expectation(psi, "kinetic", m=-1)
    with pytest.raises(ConfigurationError):
        expectation(psi, "energy")
    generalized = WaveState(SMALL, MOMENTUM, np.ones(64), generalized=True)
    with pytest.raises(GeneralizedStateError):
        expectation(generalized, "x")


def test_wavestate_validation():
    with pytest.raises(ShapeError):
        WaveState(SMALL, POSITION, np.ones(32))
    with pytest.raises(ConfigurationError):
        WaveState(SMALL, "energy", np.ones(64))
    with pytest.raises(ConfigurationError):
        WaveState(SMALL, POSITION, np.zeros(64)).normalize()
    with pytest.raises(ShapeError):
        inner_product(WaveState(SMALL, POSITION, np.ones(64)),
                      WaveState(make_grid(64, 0, 1), POSITION, np.ones(64)))


def test_amplitudes_are_read_only():
    psi = gaussian_packet(SMALL, 0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        psi.amplitudes[0] = 1.0


def test_two_body_product_and_transforms():
    gx, gz = make_grid(64, -10, 10), make_grid(32, -5, 5)
    a, b = gaussian_packet(gx, 1.0, 0.5, 1.0), gaussian_packet(gz, 0.0, 0.0, 0.7)
    state = TwoBodyState.product(a, b)
    assert state.amplitudes.shape == (32, 64)
    assert state.norm() == pytest.approx(1.0, abs=1e-12)
    mixed = state.to(basis_x=MOMENTUM)
    assert mixed.norm() == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(mixed.to(basis_x=POSITION).amplitudes, state.amplitudes, atol=1e-12)
    np.testing.assert_allclose(mixed.amplitudes[:, :], np.outer(b.amplitudes, a.to(MOMENTUM).amplitudes),
                               atol=1e-12)
    with pytest.raises(ShapeError):
        TwoBodyState(gx, gz, POSITION, POSITION, np.ones(10))
