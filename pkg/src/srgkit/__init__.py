"""Scaled relative graphs (SRGs) of matrices and linear time-invariant systems.

The region of an operator ``T`` is approximated by intersecting, over a grid
of real ``alpha``, the rings ``min_gain <= |z - alpha| <= max_gain`` built
from the gains of ``T - alpha*I``. The Beltrami-Klein map turns every ring
into half-planes of the unit disk, which makes the intersection convex and
its boundary cheap to compute.
"""

from .engine import (
    SrgRegion,
    compute_region,
    make_alpha_grid,
    region_boundary,
    region_contains,
    region_refine,
)
from .gains import (
    BoundedRealGainProvider,
    FrequencyGainProvider,
    GainPair,
    GainProvider,
    MatrixGainProvider,
)
from .geometry import INF, Annulus, ExtComplex, chordal_distance, fbk, gbk
from .lti import MatrixModel, StateSpace, TransferMatrix, load_model, realize

__version__ = "0.1.0"

__all__ = [
    "INF",
    "Annulus",
    "BoundedRealGainProvider",
    "ExtComplex",
    "FrequencyGainProvider",
    "GainPair",
    "GainProvider",
    "MatrixGainProvider",
    "MatrixModel",
    "SrgRegion",
    "StateSpace",
    "TransferMatrix",
    "chordal_distance",
    "compute_region",
    "fbk",
    "gbk",
    "load_model",
    "make_alpha_grid",
    "realize",
    "region_boundary",
    "region_contains",
    "region_refine",
]
