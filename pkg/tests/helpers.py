"""Shared fixtures data: the seeded random Gaussian suite."""
import numpy as np

from timelab import make_grid

SEED = 1
DX = 0.6


def random_gaussians(n_states, seed=SEED):
    """Gaussians with |p0| between 3 and 4 momentum spreads.

    Yields ``dict(x0, p0, sigma, sigma_p)``; positions and momenta have
    independent random signs, so some packets move away from the detector.
    """
    rng = np.random.default_rng(seed)
    for _ in range(n_states):
        sigma_p = rng.uniform(0.3, 0.4)
        ratio = rng.uniform(3.0, 4.0)
        distance = rng.uniform(10.0, 14.0)
        x0 = distance * rng.choice([-1.0, 1.0])
        p0 = ratio * sigma_p * rng.choice([-1.0, 1.0])
        yield {"x0": x0, "p0": p0, "sigma": 1.0 / (2 * sigma_p), "sigma_p": sigma_p}


def centered_grid(n_points, dx=DX):
    length = n_points * dx
    return make_grid(n_points, -length / 2, length / 2)


def image_free_window(grid, packet, m=1.0):
    """Symmetric T window ending before periodic images can reach x = 0.

    Momenta up to ``|p0| + 6 sigma_p`` count; faster components carry
    less than 1e-8 of the probability.  The step resolves the arrival-time
    spread four times over.
    """
    distance = abs(packet["x0"])
    t_max = 0.9 * m * (grid.length - distance) / (abs(packet["p0"]) + 6 * packet["sigma_p"])
    t_spread = m * distance * packet["sigma_p"] / packet["p0"] ** 2
    n_T = int(2 * t_max / (t_spread / 4)) + 1
    return (-t_max, t_max), n_T
