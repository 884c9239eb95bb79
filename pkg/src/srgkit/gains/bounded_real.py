"""Gains of state-space models through the Bounded Real Lemma.

Feasibility of the bounded-real inequality for a given ``gamma`` (without the
``P >= 0`` constraint) is decided by the Hamiltonian test: for
``gamma > sigma_max(D)`` it holds iff the Hamiltonian matrix below has no
eigenvalues on the imaginary axis. The ``P >= 0`` constraint is feasible for a
minimal realization iff ``A`` is Hurwitz, so hard gains are the soft ones
gated by stability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..lti import DelayNotSupportedError, NoInverseError, StateSpace, TransferMatrix, classify_poles, invert, realize
from . import GainPair, GainProvider, Witness

MAX_BISECTIONS = 200


@dataclass(frozen=True, eq=False)
class BrlQuery:
    ss: StateSpace
    alpha: float = 0.0
    mode: str = "soft"
    tolerance: float = 1e-6

    def __post_init__(self):
        if self.mode not in ("soft", "hard"):
            raise ValueError(f"mode must be 'soft' or 'hard', got {self.mode!r}")
        object.__setattr__(self, "ss", as_state_space(self.ss))

    @property
    def D(self) -> np.ndarray:
        return self.ss.D - self.alpha * np.eye(self.ss.m)


def as_state_space(model) -> StateSpace:
    """``model`` as a state-space quadruple (minimal realization of delay-free transfer matrices)."""
    if isinstance(model, StateSpace):
        return model
    if getattr(model, "has_delay", False):
        raise DelayNotSupportedError("bounded-real gains need a delay-free rational model")
    if isinstance(model, TransferMatrix):
        return realize(model)
    raise TypeError(f"bounded-real gains need a StateSpace model, got {type(model).__name__}")


def hamiltonian(A, B, C, D, gamma: float) -> np.ndarray:
    """Hamiltonian whose imaginary eigenvalues ``i w`` mark ``gamma`` as a singular value of ``T(i w)``."""
    m = D.shape[1]
    R = gamma**2 * np.eye(m) - D.T @ D
    Ri = np.linalg.inv(R)
    Ah = A + B @ Ri @ D.T @ C
    top = np.hstack([Ah, B @ Ri @ B.T])
    bot = np.hstack([-C.T @ (np.eye(D.shape[0]) + D @ Ri @ D.T) @ C, -Ah.T])
    return np.vstack([top, bot])


def _imag_eigs(H: np.ndarray) -> np.ndarray:
    """Eigenvalues of ``H`` that are imaginary up to a tolerance relative to their modulus."""
    ev = np.linalg.eigvals(H)
    tol = 1e-8 * max(1.0, np.linalg.norm(H, 1))
    return ev[np.abs(ev.real) <= np.maximum(1e-6 * np.abs(ev), tol * 1e-6) + 1e-12]


def _crosses(ss: StateSpace, D: np.ndarray, gamma: float, omegas) -> float | None:
    """First frequency at which ``gamma`` is (numerically) a singular value of ``T(i w)``."""
    for w in omegas:
        G = ss.C @ np.linalg.solve(1j * w * np.eye(ss.n) - ss.A, ss.B) + D
        sv = np.linalg.svd(G, compute_uv=False)
        if np.min(np.abs(sv - gamma)) <= 1e-7 * gamma:
            return float(w)
    return None


def _coarse_peak(ss: StateSpace, D: np.ndarray) -> tuple[float, float]:
    rho = max([1.0] + [abs(p) for p in ss.poles()])
    w = np.concatenate([[0.0], np.geomspace(1e-4 * rho, 1e4 * rho, 200),
                        np.abs(ss.poles().imag)])
    shifted = StateSpace(ss.A, ss.B, ss.C, D, list(ss.warnings))
    vals = shifted.eval_many(1j * w)
    sv = np.linalg.svd(vals, compute_uv=False)[:, 0]
    sv = np.where(np.isfinite(sv), sv, -np.inf)
    k = int(np.argmax(sv))
    return float(sv[k]), float(w[k])


def _linf_norm(ss: StateSpace, D: np.ndarray, rtol: float) -> tuple[float, float]:
    """L-infinity norm of ``C (sI-A)^{-1} B + D`` (A without imaginary eigenvalues) and a peak frequency."""
    d_norm = float(np.linalg.norm(D, 2)) if D.size else 0.0
    if ss.n == 0 or not np.any(ss.B) or not np.any(ss.C):
        return d_norm, math.inf
    grid_peak, w_peak = _coarse_peak(ss, D)
    lo = max(d_norm, grid_peak)
    known = grid_peak
    dist = float(np.min(np.abs(np.linalg.eigvals(ss.A).real)))
    hi = d_norm + np.linalg.norm(ss.C, 2) * np.linalg.norm(ss.B, 2) / dist
    hi = max(hi, lo * (1.0 + 1e-3) + 1e-300)

    def feasible(g):
        # gamma just above sigma_max(D) makes R singular; keep strictly above
        if g <= d_norm * (1.0 + 1e-14):
            return False, None
        ie = _imag_eigs(hamiltonian(ss.A, ss.B, ss.C, D, g))
        # near-singular R inflates H; confirm candidates on the frequency response
        w_hit = _crosses(ss, D, g, np.unique(np.abs(ie.imag))) if ie.size else None
        if w_hit is None:
            if g < known * (1.0 - 1e-9):
                raise ArithmeticError(
                    f"Hamiltonian test not monotone: gamma={g!r} passes below sampled peak {known!r}")
            return True, None
        return False, w_hit

    for _ in range(60):
        ok, _ = feasible(hi)
        if ok:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise ArithmeticError("could not bracket the L-infinity norm")
    for _ in range(MAX_BISECTIONS):
        if hi - lo <= rtol * hi:
            return hi, w_peak
        mid = 0.5 * (lo + hi)
        ok, w = feasible(mid)
        if ok:
            hi = mid
        else:
            lo = mid
            if w is not None:
                w_peak = w
    raise ArithmeticError("bisection on gamma did not converge")


def _tol_axis(ss: StateSpace) -> float:
    return 1e-8 * max(1.0, ss.norm_a())


def brl_max_gain(q: BrlQuery) -> float:
    return _max_gain(q)[0]


def _max_gain(q: BrlQuery) -> tuple[float, Witness]:
    ss = q.ss
    classes = classify_poles(ss.poles(), max(1.0, ss.norm_a()))
    if classes["axis"]:
        return math.inf, Witness("pole", min(classes["axis"], key=abs))
    if q.mode == "hard" and classes["rhp"]:
        return math.inf, Witness("pole", max(classes["rhp"], key=lambda z: z.real))
    g, w = _linf_norm(ss, q.D, q.tolerance)
    return g, (Witness("infinity") if math.isinf(w) else Witness("omega", w))


def brl_min_gain(q: BrlQuery) -> float:
    return _min_gain(q)[0]


def _min_gain(q: BrlQuery) -> tuple[float, Witness]:
    D = q.D
    shifted = StateSpace(q.ss.A, q.ss.B, q.ss.C, D, list(q.ss.warnings))
    try:
        inv = invert(shifted)
    except NoInverseError:
        return 0.0, Witness("singular-D")
    if q.mode == "hard" and inv.n:
        tol = _tol_axis(inv)
        ev = np.linalg.eigvals(inv.A)
        bad = ev[ev.real >= -tol]
        if bad.size:
            return 0.0, Witness("zero", complex(bad[np.argmax(bad.real)]))
    g, w = _max_gain(BrlQuery(inv, 0.0, q.mode, q.tolerance))
    if math.isinf(g):
        return 0.0, Witness("zero", w.where)
    return 1.0 / g, w


class BoundedRealGainProvider(GainProvider):
    kind = "ss"

    def __init__(self, ss: StateSpace, mode: str = "soft", tolerance: float = 1e-6):
        self.ss = as_state_space(ss)
        self.mode = mode
        self.tolerance = tolerance
        BrlQuery(self.ss, 0.0, mode, tolerance)

    def gains(self, alpha: float) -> GainPair:
        q = BrlQuery(self.ss, alpha, self.mode, self.tolerance)
        hi, hw = _max_gain(q)
        lo, lw = _min_gain(q)
        flags = ("non-minimal",) if not self.ss.is_minimal else ()
        return GainPair(min(lo, hi), hi, lw, hw, flags)

    def scale(self) -> float:
        return self.ss.spectral_scale()

    def metadata(self) -> dict:
        return {"kind": self.kind, "mode": self.mode, "m": int(self.ss.m), "n": int(self.ss.n),
                "minimal": bool(self.ss.is_minimal), "tolerance": self.tolerance}
