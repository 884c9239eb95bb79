"""Integrator 1/s: the soft region is the extended imaginary axis, the hard
region the closed right half-plane with infinity."""

import numpy as np
from common import FigureConfig, parse, run_figure

from srgkit.lti import realize
from srgkit.oracle import SimConfig, points_to_arrays, srg_points_from_sim


def samples(model, mode):
    if mode == "soft":
        w = np.geomspace(1e-2, 1e2, 200)
        z = 1 / (1j * np.concatenate([w, -w]))
        return z, np.zeros(z.size, bool), 1e-6
    pts = srg_points_from_sim(realize(model), SimConfig(family="exponential", count=100, seed=5))
    z, inf = points_to_arrays(pts)
    return z, inf, 2e-2


if __name__ == "__main__":
    run_figure(parse(FigureConfig("t3", xlim=(-3, 3), ylim=(-3, 3))), samples)
