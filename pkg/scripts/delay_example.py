"""Delay example exp(-s)/(s+1): both regions lie in the closed unit disk (the
peak gain is 1); the hard minimum gains come from right-half-plane sampling."""

import numpy as np
from common import FigureConfig, parse, run_figure

from srgkit.oracle import points_to_arrays, srg_points_from_frequency


def samples(model, mode):
    w = np.linspace(0.0, 40.0, 2000)
    z, inf = points_to_arrays(srg_points_from_frequency(model, w))
    return z, inf, 1e-6


if __name__ == "__main__":
    run_figure(parse(FigureConfig("t1", alphas=33, xlim=(-1.2, 1.2), ylim=(-1.2, 1.2))), samples)
