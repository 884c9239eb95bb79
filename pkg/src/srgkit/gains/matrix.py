"""Gains and sampled scaled relative graphs of constant matrices."""

from __future__ import annotations

import numpy as np

from ..geometry import ExtComplex
from . import GainPair, GainProvider, Witness


def matrix_gains(M, alpha: float) -> tuple[float, float]:
    """Smallest and largest singular values of ``M - alpha*I``."""
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    sv = np.linalg.svd(M - alpha * np.eye(M.shape[0]), compute_uv=False)
    return float(sv[-1]), float(sv[0])


def srg_points(U: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Upper SRG points ``|y|/|u| exp(i angle(u, y))`` for column pairs of ``U`` and ``Y``.

    The angle uses ``cos = Re<y, u> / (|y||u|)``, clamped to [-1, 1], and is
    zero when ``y = 0``.
    """
    nu = np.linalg.norm(U, axis=0)
    ny = np.linalg.norm(Y, axis=0)
    inner = np.real(np.sum(np.conj(U) * Y, axis=0))
    with np.errstate(divide="ignore", invalid="ignore"):
        cos = np.where(ny > 0, inner / (nu * ny), 1.0)
    theta = np.arccos(np.clip(cos, -1.0, 1.0))
    return (ny / nu) * np.exp(1j * theta)


def srg_sample_matrix_array(M, count: int, seed: int = 0) -> np.ndarray:
    """``count`` upper-half SRG samples of ``M`` as a complex array."""
    if count <= 0:
        raise ValueError("count must be positive")
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    rng = np.random.default_rng(seed)
    m = M.shape[0]
    U = rng.standard_normal((m, count)) + 1j * rng.standard_normal((m, count))
    U /= np.linalg.norm(U, axis=0)
    return srg_points(U, M @ U)


def srg_sample_matrix(M, count: int, seed: int = 0) -> list[ExtComplex]:
    """Random SRG points of ``M``, each emitted with its conjugate."""
    out = []
    for z in srg_sample_matrix_array(M, count, seed):
        out.append(ExtComplex(z.real, z.imag))
        out.append(ExtComplex(z.real, -z.imag))
    return out


class MatrixGainProvider(GainProvider):
    kind = "matrix"
    mode = "exact"

    def __init__(self, M):
        self.M = np.atleast_2d(np.asarray(M, dtype=complex))
        if self.M.shape[0] != self.M.shape[1]:
            raise ValueError("matrix must be square")

    def gains(self, alpha: float) -> GainPair:
        lo, hi = matrix_gains(self.M, alpha)
        return GainPair(lo, hi, Witness("singular-vector"), Witness("singular-vector"))

    def scale(self) -> float:
        return max(1.0, float(np.linalg.norm(self.M, 2)))

    def center(self) -> float:
        # midpoint of the real extent of the numerical range
        H = 0.5 * (self.M + self.M.conj().T)
        ev = np.linalg.eigvalsh(H)
        return float(0.5 * (ev[0] + ev[-1]))

    def metadata(self) -> dict:
        return {"kind": self.kind, "mode": self.mode, "m": int(self.M.shape[0])}
