import warnings

import numpy as np
from scipy.integrate import trapezoid
import pytest

from timelab import (ArrivalEigenfunction, ab_eigenfunction, ab_packet, gaussian_packet,
                     inner_product, make_grid)
from timelab.errors import ConfigurationError, GeneralizedStateError, TruncationWarning
from timelab.spectral import MOMENTUM


def test_gaussian_validation_and_truncation():
    g = make_grid(256, -10, 10)
    with pytest.raises(ConfigurationError) as exc:
        gaussian_packet(g, 0.0, 0.0, 0.0)
    assert exc.value.field == "sigma"
    with pytest.warns(TruncationWarning):
        gaussian_packet(g, 8.0, 0.0, 1.0)
    with pytest.warns(TruncationWarning):
        gaussian_packet(g, 0.0, 60.0, 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        gaussian_packet(g, 0.0, 1.0, 1.0)


def test_eigenfunction_label_validation():
    with pytest.raises(ConfigurationError):
        ArrivalEigenfunction(1.0, 0, 1.0)
    with pytest.raises(ConfigurationError):
        ArrivalEigenfunction(1.0, 1, 0.0)


@pytest.mark.parametrize("alpha", [1, -1])
def test_eigenfunction_sector_and_phase(alpha):
    g = make_grid(256, -20, 20)
    T, m = 3.0, 2.0
    e = ab_eigenfunction(ArrivalEigenfunction(T, alpha, m), g)
    assert e.generalized and e.basis == MOMENTUM
    off = alpha * g.p < 0
    assert np.all(e.amplitudes[off] == 0)
    p = g.p[~off]
    np.testing.assert_allclose(e.amplitudes[~off],
                               np.sqrt(np.abs(p) / m) * np.exp(1j * T * p ** 2 / (2 * m)))
    with pytest.raises(GeneralizedStateError):
        e.require_normalizable()


def test_eigenfunctions_are_delta_normalized_in_time():
    # (1/2pi) <T|phi> integrated against a smooth packet reproduces it
    g = make_grid(2048, -200, 200)
    psi = gaussian_packet(g, -10.0, 2.0, 1.0)
    T = np.linspace(-20, 40, 3001)
    total = 0.0
    for alpha in (1, -1):
        amps = np.array([inner_product(ab_eigenfunction(ArrivalEigenfunction(t, alpha, 1.0), g), psi)
                         for t in T[::10]])
        total += trapezoid(np.abs(amps) ** 2, T[::10]) / (2 * np.pi)
    assert total == pytest.approx(1.0, abs=2e-3)


@pytest.mark.parametrize("alpha", [1, -1])
def test_ab_packet_is_normalized_and_in_sector(alpha):
    g = make_grid(2048, -100, 100)
    packet = ab_packet(g, 5.0, 1.0, alpha, 1.0)
    assert not packet.generalized
    assert packet.norm() == pytest.approx(1.0, abs=1e-12)
    assert np.all(packet.amplitudes[alpha * g.p < 0] == 0)


def test_ab_packet_momentum_envelope():
    # |amplitude|^2 / (p/m) follows exp(-dT^2 E^2) up to the quadrature error
    g = make_grid(2048, -100, 100)
    dT, m = 1.0, 1.0
    packet = ab_packet(g, 5.0, dT, 1, m)
    p = g.p[g.p > 0]
    E = p ** 2 / (2 * m)
    shape = np.abs(packet.amplitudes[g.p > 0]) ** 2 / (p / m)
    expected = np.exp(-dT ** 2 * E ** 2)
    np.testing.assert_allclose(shape / shape[0] * expected[0], expected, atol=1e-10)


def test_ab_packet_errors():
    g = make_grid(256, -20, 20)
    with pytest.raises(ConfigurationError):
        ab_packet(g, 5.0, 0.0, 1, 1.0)
    with pytest.warns(TruncationWarning):
        ab_packet(g, 5.0, 0.01, 1, 1.0)
