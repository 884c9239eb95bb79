"""Brute-force SRG samples from simulation and from frequency responses.

These points validate computed regions from below: every sample must lie in
the region (up to a tolerance accounting for truncation and discretization).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .geometry import ExtComplex
from .lti import PoleEvaluationError, StateSpace, TransferMatrix

#: largest growth factor allowed for exponential test inputs
EXP_CAP = 1e12


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings for :func:`srg_points_from_sim`.

    Parameters
    ----------
    horizon : float
        Truncation time ``tau`` in seconds.
    step : float
        Sampling / hold period ``h``; ``horizon >= 100*step``.
    family : str
        ``'random'`` (band-limited), ``'exponential'`` (``exp(s t) v`` with
        ``Re s > 0``) or ``'sinusoid'``.
    count : int
        Number of input signals.
    seed : int
    bandwidth : float
        Highest frequency in rad/s of random and sinusoidal inputs.
    exponents : tuple of complex, optional
        Explicit ``s`` values for the exponential family (cycled over).
    """

    horizon: float = 20.0
    step: float = 1e-2
    family: str = "random"
    count: int = 32
    seed: int = 0
    bandwidth: float = 10.0
    exponents: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError(f"step must be positive, got {self.step}")
        if self.horizon < 100 * self.step * (1 - 1e-12):
            raise ValueError(f"horizon {self.horizon} shorter than 100 steps of {self.step}")
        if self.family not in ("random", "exponential", "sinusoid"):
            raise ValueError(f"unknown input family {self.family!r}")
        if self.count < 1:
            raise ValueError("count must be >= 1")

    @property
    def times(self) -> np.ndarray:
        n = int(round(self.horizon / self.step))
        return np.arange(n + 1) * self.step


def zoh_discretize(A: np.ndarray, B: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact zero-order-hold pair ``(e^{Ah}, int_0^h e^{As} ds B)`` from one matrix exponential."""
    n, m = B.shape
    M = np.zeros((n + m, n + m))
    M[:n, :n] = A
    M[:n, n:] = B
    E = sla.expm(M * h)
    return E[:n, :n], E[:n, n:]


def simulate_response(S: StateSpace, u: np.ndarray, h: float) -> np.ndarray:
    """Response of ``S`` from rest to a held input.

    Parameters
    ----------
    S : StateSpace
    u : ndarray, shape (N,), (N, m) or (N, m, k)
        Input samples ``u(k h)``, held constant on ``[k h, (k+1) h)``; a
        trailing axis batches ``k`` independent inputs. Complex inputs are
        simulated by linearity.
    h : float

    Returns
    -------
    ndarray
        Output samples ``y(k h)`` with the shape of ``u``.

    Raises
    ------
    OverflowError
        When the state leaves the floating-point range (unstable growth).
    """
    if getattr(S, "has_delay", False):
        raise TypeError("simulation needs a delay-free state-space model")
    u = np.asarray(u)
    shape = u.shape
    m = S.m
    if u.ndim == 1:
        if m != 1:
            raise ValueError(f"1-D input given to a {m}-input model")
        U = u.reshape(-1, 1, 1)
    elif u.ndim == 2:
        U = u.reshape(u.shape[0], m, 1)
    else:
        U = u
    if U.shape[1] != m:
        raise ValueError(f"input has {U.shape[1]} channels, model has {m}")
    N, _, k = U.shape
    dtype = np.result_type(U.dtype, float)
    Y = np.einsum("ij,tjk->tik", S.D, U).astype(dtype)
    if S.n:
        Ad, Bd = zoh_discretize(S.A, S.B, h)
        x = np.zeros((S.n, k), dtype=dtype)
        lim = 1e150
        for t in range(N):
            Y[t] += S.C @ x
            x = Ad @ x + Bd @ U[t]
            if not np.all(np.abs(x) < lim):
                rate = float(np.max(np.linalg.eigvals(S.A).real))
                raise OverflowError(
                    f"state overflow at t={(t + 1) * h:.6g}: unstable growth rate {rate:.6g} 1/s")
    return Y.reshape(shape)


def trapezoid_corrected(f: np.ndarray, h: float, axis: int = 0) -> np.ndarray:
    """Trapezoid rule with the first Euler-Maclaurin end correction.

    The endpoint derivatives come from second-order one-sided differences, so
    the rule is fourth-order for smooth integrands.
    """
    f = np.moveaxis(np.asarray(f), axis, 0)
    total = h * (f.sum(axis=0) - 0.5 * (f[0] + f[-1]))
    if f.shape[0] >= 3:
        d0 = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h)
        d1 = (3 * f[-1] - 4 * f[-2] + f[-3]) / (2 * h)
        total = total - h * h / 12.0 * (d1 - d0)
    return total


def _srg_point(nu2, ny2, iuy) -> list[ExtComplex] | None:
    if nu2 < 1e-24:
        return None
    ratio = math.sqrt(max(ny2, 0.0) / nu2)
    if ny2 <= 0:
        return [ExtComplex(0.0, 0.0)]
    c = float(np.clip(iuy / math.sqrt(nu2 * ny2), -1.0, 1.0))
    th = math.acos(c)
    z = ratio * complex(math.cos(th), math.sin(th))
    return [ExtComplex(z.real, z.imag), ExtComplex(z.real, -z.imag)]


def _inputs(cfg: SimConfig, m: int) -> np.ndarray:
    t = cfg.times
    rng = np.random.default_rng(cfg.seed)
    out = np.zeros((t.size, m, cfg.count), dtype=complex if cfg.family == "exponential" else float)
    for k in range(cfg.count):
        v = rng.standard_normal(m)
        v /= np.linalg.norm(v)
        if cfg.family == "random":
            comps = 16
            w = rng.uniform(0.0, cfg.bandwidth, comps)
            ph = rng.uniform(0.0, 2 * math.pi, comps)
            amp = rng.standard_normal((comps, m))
            out[:, :, k] = np.cos(np.outer(t, w) + ph) @ amp
        elif cfg.family == "sinusoid":
            w = rng.uniform(0.1, cfg.bandwidth)
            out[:, :, k] = np.outer(np.sin(w * t), v)
        else:
            if cfg.exponents:
                s = complex(cfg.exponents[k % len(cfg.exponents)])
            else:
                s = complex(rng.uniform(0.05, 1.0), rng.uniform(0.0, 2.0))
            if s.real <= 0:
                raise ValueError(f"exponential inputs need Re s > 0, got {s}")
            s = complex(min(s.real, math.log(EXP_CAP) / cfg.horizon), s.imag)
            out[:, :, k] = np.outer(np.exp(s * t), v)
    return out


def srg_points_from_sim(S: StateSpace, cfg: SimConfig = SimConfig()) -> list[ExtComplex]:
    """SRG samples of the truncated operator from simulated input/output pairs.

    For each input ``u`` the point ``|y|/|u| exp(+-i angle(u, y))`` is emitted
    (both signs), with norms and the real part of the inner product taken over
    ``[0, tau]``.
    """
    U = _inputs(cfg, S.m)
    Y = simulate_response(S, U, cfg.step)
    nu2 = trapezoid_corrected(np.sum(np.abs(U) ** 2, axis=1), cfg.step).real
    ny2 = trapezoid_corrected(np.sum(np.abs(Y) ** 2, axis=1), cfg.step).real
    iuy = trapezoid_corrected(np.sum(np.conj(U) * Y, axis=1), cfg.step).real
    pts = []
    for k in range(cfg.count):
        p = _srg_point(float(nu2[k]), float(ny2[k]), float(iuy[k]))
        if p is not None:
            pts.extend(p)
    return pts


def srg_points_from_frequency(T, omegas, directions=None, skipped: list | None = None) -> list[ExtComplex]:
    """SRG samples ``|T(iw) v| exp(+-i angle)`` with ``<u, y> = v* T(iw) v``.

    ``directions`` is an array of shape ``(k, m)`` (default: the unit vectors);
    for scalar models this is just ``T(iw)`` and its conjugate. Frequencies at
    poles are skipped and recorded in ``skipped``.
    """
    m = T.m
    V = np.eye(m, dtype=complex) if directions is None else np.atleast_2d(np.asarray(directions, dtype=complex))
    pts = []
    for w in np.atleast_1d(omegas):
        try:
            G = np.asarray(T.eval(1j * float(w)), dtype=complex).reshape(m, m)
        except PoleEvaluationError as exc:
            if skipped is not None:
                skipped.append((float(w), str(exc)))
            continue
        if not np.all(np.isfinite(G)):
            if skipped is not None:
                skipped.append((float(w), "non-finite response"))
            continue
        for v in V:
            y = G @ v
            p = _srg_point(float(np.vdot(v, v).real), float(np.vdot(y, y).real), float(np.vdot(v, y).real))
            if p is not None:
                pts.extend(p)
    return pts


def points_to_arrays(pts) -> tuple[np.ndarray, np.ndarray]:
    z = np.array([0j if p.is_inf else complex(p) for p in pts], dtype=complex)
    inf = np.array([p.is_inf for p in pts], dtype=bool)
    return z, inf


__all__ = [
    "SimConfig",
    "points_to_arrays",
    "simulate_response",
    "srg_points_from_frequency",
    "srg_points_from_sim",
    "trapezoid_corrected",
    "zoh_discretize",
]
