"""Unstable 2x2 example: finite soft region, hard region containing infinity."""

import numpy as np
from common import FigureConfig, parse, run_figure

from srgkit.oracle import points_to_arrays, srg_points_from_frequency


def samples(model, mode):
    rng = np.random.default_rng(4)
    w = np.geomspace(1e-2, 1e2, 150)
    V = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
    z, inf = points_to_arrays(srg_points_from_frequency(model, w, V))
    return z, inf, 1e-6


if __name__ == "__main__":
    run_figure(parse(FigureConfig("t2", xlim=(-2.5, 2.5), ylim=(-2.5, 2.5))), samples)
