"""Frequency-domain gains of LTI operators.

Soft gains are the extremal singular values of ``T(iw) - alpha*I`` over the
imaginary axis (the operator on L2). Hard gains are the limits of truncated
gains, i.e. extremal singular values over the open right half-plane.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from ..lti import DelayNotSupportedError, ModelError, NoInverseError, StateSpace, classify_poles, invert, realize
from . import GainPair, GainProvider, Witness

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_N_CANDIDATES = 8


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Non-negative frequencies (the negative half follows by conjugate symmetry)."""

    omega: np.ndarray
    omega_max: float
    budget: int = 10_000
    include_infinity: bool = True

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float)
        if w.ndim != 1 or w.size < 64:
            raise ValueError("frequency grid needs at least 64 points")
        if np.any(w < 0) or np.any(np.diff(w) <= 0):
            raise ValueError("frequency grid must be non-negative and strictly increasing")
        object.__setattr__(self, "omega", w)


def make_frequency_grid(model, points: int = 400, omega_max: float | None = None,
                        budget: int = 10_000) -> FrequencyGrid:
    """Log-spaced grid over ``[1e-4, 1e4] * rho`` plus zero and pole/zero frequencies.

    Delayed models also get a linear grid resolving ``exp(-i w tau)`` (32
    points per period) up to at least ``64*pi/tau_min``.
    """
    rho = model.spectral_scale()
    lo, hi = 1e-4 * rho, 1e4 * rho
    if omega_max is not None:
        if omega_max <= lo:
            raise ValueError(f"omega_max must exceed {lo}")
        hi = float(omega_max)
    parts = [np.array([0.0]), np.geomspace(lo, hi, max(points, 64))]
    if getattr(model, "has_delay", False):
        tau = model.min_delay
        lin_max = 64.0 * math.pi / tau
        hi = max(hi, lin_max)
        parts.append(np.arange(0.0, lin_max, (2.0 * math.pi / tau) / 32.0))
        parts.append(np.array([hi]))
    crit = [abs(p.imag) for p in model.poles()]
    parts.append(np.array([c for c in crit if lo <= c <= hi]))
    w = np.unique(np.concatenate(parts))
    return FrequencyGrid(w, hi, budget)


def refine_peak(f, bracket: tuple[float, float], maximize: bool = True,
                xtol_rel: float = 1e-8, max_iter: int = 200) -> tuple[float, float]:
    """Golden-section search for a local extremum of ``f`` inside ``bracket``.

    Stops once the bracket is narrower than ``xtol_rel * (1 + |x|)``. A
    function that is flat on the bracket returns its midpoint.
    """
    a, b = float(bracket[0]), float(bracket[1])
    if b < a:
        a, b = b, a
    sign = -1.0 if maximize else 1.0
    g = lambda x: sign * f(x)  # noqa: E731
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fa, fb, fc, fd = g(a), g(b), g(c), g(d)
    if fa == fb == fc == fd:
        mid = 0.5 * (a + b)
        return mid, f(mid)
    best_x, best_f = min(((a, fa), (b, fb), (c, fc), (d, fd)), key=lambda t: t[1])
    for _ in range(max_iter):
        if b - a <= xtol_rel * (1.0 + abs(0.5 * (a + b))):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = g(c)
            if fc < best_f:
                best_x, best_f = c, fc
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = g(d)
            if fd < best_f:
                best_x, best_f = d, fd
    return best_x, sign * best_f


def _singular_values(model, alpha: float, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(sigma_min, sigma_max) of ``T(s) - alpha*I``; NaN where T is not finite."""
    vals = model.eval_many(s)
    m = vals.shape[-1]
    ok = np.all(np.isfinite(vals.reshape(len(s), -1)), axis=1)
    smin = np.full(len(s), np.nan)
    smax = np.full(len(s), np.nan)
    if np.any(ok):
        sv = np.linalg.svd(vals[ok] - alpha * np.eye(m), compute_uv=False)
        smin[ok] = sv[:, -1]
        smax[ok] = sv[:, 0]
    return smin, smax


def _pole_scale(model) -> float:
    if isinstance(model, StateSpace):
        return max(1.0, model.norm_a())
    return max([1.0] + [abs(p) for p in model.poles()])


def _pole_classes(model) -> dict:
    return classify_poles(model.poles(), _pole_scale(model))


def _local_extrema(v: np.ndarray, maximize: bool) -> list[int]:
    x = np.where(np.isnan(v), -np.inf if maximize else np.inf, v)
    y = x if maximize else -x
    n = len(y)
    idx = [k for k in range(n)
           if (k == 0 or y[k] >= y[k - 1]) and (k == n - 1 or y[k] >= y[k + 1]) and np.isfinite(y[k])]
    idx.sort(key=lambda k: -y[k])
    return idx[:_N_CANDIDATES]


def _axis_extreme(model, alpha, grid: FrequencyGrid, which: str, maximize: bool):
    """Refined extremum of one singular value over the grid; returns (omega, value, evaluations)."""
    w = grid.omega
    smin, smax = _singular_values(model, alpha, 1j * w)
    v = smax if which == "max" else smin
    col = 1 if which == "max" else 0

    def f(x):
        s = _singular_values(model, alpha, np.array([1j * x]))[col][0]
        if np.isnan(s):
            return -np.inf if maximize else np.inf
        return s

    best_w, best_v = math.nan, (-np.inf if maximize else np.inf)
    evals = len(w)
    for k in _local_extrema(v, maximize):
        if evals >= grid.budget:
            break
        a, b = w[max(k - 1, 0)], w[min(k + 1, len(w) - 1)]
        if b > a:
            x, fx = refine_peak(f, (a, b), maximize=maximize)
            evals += 60
        else:
            x, fx = w[k], v[k]
        for cand_w, cand_v in ((w[k], v[k]), (x, fx)):
            if (maximize and cand_v > best_v) or (not maximize and cand_v < best_v):
                best_w, best_v = cand_w, cand_v
    return best_w, best_v, evals


def _infinity_candidates(model, alpha: float):
    """Values of (sigma_min, sigma_max) approached as |w| -> inf, or None when not determined."""
    val, osc = model.eval_at_infinity()
    m = val.shape[0]
    if not np.all(np.isfinite(val)):
        return "improper"
    if not osc:
        sv = np.linalg.svd(val - alpha * np.eye(m), compute_uv=False)
        return float(sv[-1]), float(sv[0])
    if m == 1:
        c = abs(val[0, 0])
        return abs(c - abs(alpha)), c + abs(alpha)
    return None


def soft_gains(model, alpha: float, grid: FrequencyGrid | None = None) -> GainPair:
    """Extremal singular values of ``T(iw) - alpha*I`` over the imaginary axis."""
    grid = grid or make_frequency_grid(model)
    flags = []
    axis = _pole_classes(model)["axis"]
    lim = _infinity_candidates(model, alpha) if grid.include_infinity else None
    if lim is None:
        flags.append("grid-limited")

    w_lo, v_lo, _ = _axis_extreme(model, alpha, grid, "min", maximize=False)
    min_w = Witness("omega", w_lo)
    if isinstance(lim, tuple) and lim[0] <= v_lo:
        v_lo, min_w = lim[0], Witness("infinity")

    if axis:
        p = min(axis, key=abs)
        return GainPair(float(v_lo), math.inf, min_w, Witness("pole", p), tuple(flags))
    if lim == "improper":
        return GainPair(float(v_lo), math.inf, min_w, Witness("infinity"), tuple(flags))
    w_hi, v_hi, _ = _axis_extreme(model, alpha, grid, "max", maximize=True)
    max_w = Witness("omega", w_hi)
    if isinstance(lim, tuple) and lim[1] >= v_hi:
        v_hi, max_w = lim[1], Witness("infinity")
    if not math.isfinite(v_hi):
        raise ArithmeticError("no finite frequency sample")
    return GainPair(float(min(v_lo, v_hi)), float(v_hi), min_w, max_w, tuple(flags))


_REALIZATIONS: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def _state_space(model):
    """Minimal realization of a delay-free proper model, or None."""
    if isinstance(model, StateSpace):
        return model
    if getattr(model, "has_delay", True) or not model.is_proper:
        return None
    try:
        return _REALIZATIONS[model]
    except KeyError:
        pass
    try:
        ss = realize(model)
    except (DelayNotSupportedError, ModelError):
        ss = None
    _REALIZATIONS[model] = ss
    return ss


def _rhp_sampled_min(model, alpha: float, grid: FrequencyGrid):
    """Smallest sigma_min of ``T(s) - alpha*I`` found on a right-half-plane grid, then polished."""
    rho = model.spectral_scale()
    sig = np.geomspace(1e-3 * rho, 1e3 * rho, 25)
    w = grid.omega
    best_v, best_s = np.inf, None
    for x in sig:
        s = x + 1j * w
        smin, _ = _singular_values(model, alpha, s)
        smin = np.where(np.isnan(smin), np.inf, smin)
        k = int(np.argmin(smin))
        if smin[k] < best_v:
            best_v, best_s = float(smin[k]), complex(s[k])
    if best_s is not None:
        def f(p):
            s = complex(math.exp(p[0]), p[1])
            v = _singular_values(model, alpha, np.array([s]))[0][0]
            return np.inf if np.isnan(v) else v
        res = minimize(f, [math.log(best_s.real), best_s.imag], method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 400})
        if res.fun < best_v:
            best_v, best_s = float(res.fun), complex(math.exp(res.x[0]), res.x[1])
    return best_v, best_s


def _right_limit(model, alpha: float):
    """sigma_min of ``T(x) - alpha*I`` as real x -> inf (delayed entries vanish)."""
    val, _ = model.eval_at_infinity()
    if hasattr(model, "entries"):
        for i, row in enumerate(model.entries):
            for j, e in enumerate(row):
                if e.delay > 0:
                    val[i, j] = 0.0
    if not np.all(np.isfinite(val)):
        return None
    return float(np.linalg.svd(val - alpha * np.eye(val.shape[0]), compute_uv=False)[-1])


def hard_gains(model, alpha: float, grid: FrequencyGrid | None = None,
               soft: GainPair | None = None) -> GainPair:
    """Extremal singular values of ``T(s) - alpha*I`` over ``Re s > 0`` (closure included)."""
    grid = grid or make_frequency_grid(model)
    soft = soft or soft_gains(model, alpha, grid)
    flags = list(soft.flags)
    classes = _pole_classes(model)
    unstable = classes["axis"] + classes["rhp"]
    if unstable:
        p = max(unstable, key=lambda z: z.real)
        max_gain, max_w = math.inf, Witness("pole", p)
    else:
        max_gain, max_w = soft.max_gain, soft.max_witness

    ss = _state_space(model)
    if ss is not None:
        shifted = StateSpace(ss.A, ss.B, ss.C, ss.D - alpha * np.eye(ss.m))
        try:
            inv = invert(shifted)
        except NoInverseError:
            return GainPair(0.0, max_gain, Witness("singular-D"), max_w, tuple(flags))
        zc = _pole_classes(inv)
        bad = zc["axis"] + zc["rhp"]
        if bad:
            z = max(bad, key=lambda q: q.real)
            return GainPair(0.0, max_gain, Witness("zero", z), max_w, tuple(flags))
        inv_grid = make_frequency_grid(inv, omega_max=None)
        inv_soft = soft_gains(inv, 0.0, inv_grid)
        min_gain = 1.0 / inv_soft.max_gain
        return GainPair(min(min_gain, max_gain), max_gain, inv_soft.max_witness, max_w, tuple(flags))

    v, s = _rhp_sampled_min(model, alpha, grid)
    min_gain, min_w = soft.min_gain, soft.min_witness
    if v < min_gain:
        min_gain, min_w = v, Witness("s", s)
    lim = _right_limit(model, alpha)
    if lim is not None and lim < min_gain:
        min_gain, min_w = lim, Witness("infinity")
    flags.append("sampled-rhp")
    return GainPair(min(min_gain, max_gain), max_gain, min_w, max_w, tuple(flags))


class FrequencyGainProvider(GainProvider):
    """Soft or hard gains of a transfer matrix (or state-space model) on a frequency grid."""

    kind = "tf"

    def __init__(self, model, mode: str = "soft", grid: FrequencyGrid | None = None,
                 omega_max: float | None = None):
        if mode not in ("soft", "hard"):
            raise ValueError(f"mode must be 'soft' or 'hard', got {mode!r}")
        self.model = model
        self.mode = mode
        self.grid = grid or make_frequency_grid(model, omega_max=omega_max)

    def gains(self, alpha: float) -> GainPair:
        if self.mode == "soft":
            return soft_gains(self.model, alpha, self.grid)
        return hard_gains(self.model, alpha, self.grid)

    def scale(self) -> float:
        return self.model.spectral_scale()

    def metadata(self) -> dict:
        return {"kind": self.kind, "mode": self.mode, "m": int(self.model.m),
                "grid_points": int(self.grid.omega.size), "omega_max": float(self.grid.omega_max)}
