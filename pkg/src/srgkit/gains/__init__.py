"""Gain providers: maps ``alpha -> (min gain, max gain)`` of ``T - alpha*I``."""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass


@dataclass(frozen=True)
class Witness:
    """Where an extremal gain is attained.

    ``kind`` is e.g. ``'omega'`` (frequency), ``'s'`` (right-half-plane
    point), ``'pole'``, ``'zero'``, ``'infinity'`` or ``'singular-D'``.
    """

    kind: str
    where: complex = 0j

    def __str__(self) -> str:
        w = complex(self.where) + 0j
        w = complex(w.real + 0.0, w.imag + 0.0)  # no '-0' in reports
        if self.kind in ("singular-D", "infinity"):
            return self.kind
        if w.imag == 0:
            return f"{self.kind}={w.real:.12g}"
        return f"{self.kind}={w.real:.12g}{w.imag:+.12g}j"


@dataclass(frozen=True)
class GainPair:
    min_gain: float
    max_gain: float
    min_witness: Witness | None = None
    max_witness: Witness | None = None
    flags: tuple = ()

    def __post_init__(self):
        if not (0.0 <= self.min_gain <= self.max_gain):
            # rounding on nearly constant gains may invert the pair by an ulp or two
            if self.min_gain > self.max_gain and self.min_gain - self.max_gain <= 1e-12 * max(1.0, self.max_gain):
                object.__setattr__(self, "min_gain", self.max_gain)
            else:
                raise ValueError(f"invalid gain pair ({self.min_gain}, {self.max_gain})")
        if math.isinf(self.max_gain) and self.max_witness is None:
            raise ValueError("infinite max gain needs a witness")

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.max_gain)


class GainProvider(ABC):
    """Computes the gains of ``T - alpha*I`` for one operator and mode."""

    kind: str = "abstract"
    mode: str = "soft"

    @abstractmethod
    def gains(self, alpha: float) -> GainPair:
        ...

    def scale(self) -> float:
        """Spectral scale used to spread the alpha grid."""
        return 1.0

    def center(self) -> float:
        """Centre of the alpha grid."""
        return 0.0

    def metadata(self) -> dict:
        return {"kind": self.kind, "mode": self.mode}


from .matrix import MatrixGainProvider, matrix_gains, srg_sample_matrix  # noqa: E402
from .frequency import (  # noqa: E402
    FrequencyGainProvider,
    FrequencyGrid,
    hard_gains,
    make_frequency_grid,
    refine_peak,
    soft_gains,
)
from .bounded_real import BoundedRealGainProvider, BrlQuery, brl_max_gain, brl_min_gain  # noqa: E402

__all__ = [
    "Witness",
    "GainPair",
    "GainProvider",
    "MatrixGainProvider",
    "matrix_gains",
    "srg_sample_matrix",
    "FrequencyGainProvider",
    "FrequencyGrid",
    "make_frequency_grid",
    "soft_gains",
    "hard_gains",
    "refine_peak",
    "BoundedRealGainProvider",
    "BrlQuery",
    "brl_max_gain",
    "brl_min_gain",
]
