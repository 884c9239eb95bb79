"""Extended complex plane, Beltrami-Klein mapping, annuli and convex chord regions.

The Beltrami-Klein map sends the extended complex plane onto the closed unit
disk, folding conjugate pairs onto the same point. Circles centred on the real
axis become chords, so an intersection of real-centred annuli becomes a convex
intersection of half-planes with the disk. That is the representation used for
assembling and drawing scaled relative graphs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ExtComplex",
    "Annulus",
    "HalfPlane",
    "KleinChordRegion",
    "PlanePath",
    "DomainError",
    "INF",
    "fbk",
    "fbk_array",
    "gbk",
    "gbk_upper_array",
    "chordal_distance",
    "chordal_distance_array",
    "radius_tol",
    "annulus_contains",
    "annulus_to_chords",
    "intersect_region",
    "region_boundary_to_plane",
]

TWO_PI = 2.0 * math.pi
# 1 - |w|^2 below this is treated as lying on the unit circle
_SNAP = 8.0 * np.finfo(float).eps
_EPS = 1e-11


class DomainError(ValueError):
    """Raised when a point lies outside the closed unit disk."""


@dataclass(frozen=True)
class ExtComplex:
    """A point of the extended complex plane.

    The point at infinity is a tagged state (``is_inf``); its ``re``/``im``
    fields are zero and carry no meaning.
    """

    re: float = 0.0
    im: float = 0.0
    is_inf: bool = False

    def __post_init__(self):
        if not self.is_inf and not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise ValueError("finite ExtComplex needs finite components; use ExtComplex.infinity()")

    @classmethod
    def infinity(cls) -> "ExtComplex":
        return cls(0.0, 0.0, True)

    @classmethod
    def of(cls, z) -> "ExtComplex":
        if isinstance(z, ExtComplex):
            return z
        z = complex(z)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            return cls.infinity()
        return cls(z.real, z.imag)

    def __complex__(self) -> complex:
        if self.is_inf:
            raise OverflowError("point at infinity has no finite complex value")
        return complex(self.re, self.im)

    def conjugate(self) -> "ExtComplex":
        return self if self.is_inf else ExtComplex(self.re, -self.im)

    def __repr__(self) -> str:
        return "ExtComplex(inf)" if self.is_inf else f"ExtComplex({self.re!r}{self.im:+}j)"


INF = ExtComplex.infinity()


def fbk_array(z: np.ndarray, inf_mask: np.ndarray | None = None) -> np.ndarray:
    """Vectorised Beltrami-Klein map of finite points (entries under ``inf_mask`` map to 1)."""
    z = np.asarray(z, dtype=complex)
    x, y = z.real, z.imag
    with np.errstate(over="ignore"):
        r2 = x * x + y * y
    big = r2 > 1.0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        inv = np.where(big, 1.0 / np.where(big, r2, 1.0), 1.0)
        # scaled by 1/|z|^2 when |z| > 1 so nothing overflows
        num_re = np.where(big, 1.0 - inv, r2 - 1.0)
        num_im = np.where(big, -2.0 * x * inv, -2.0 * x)
        den = np.where(big, 1.0 + inv, 1.0 + r2)
    w = (num_re + 1j * num_im) / den
    if inf_mask is not None:
        w = np.where(inf_mask, 1.0 + 0.0j, w)
    return w


def fbk(z) -> complex:
    """Beltrami-Klein map of a point of the extended plane into the closed unit disk."""
    z = ExtComplex.of(z)
    if z.is_inf:
        return 1.0 + 0.0j
    return complex(fbk_array(np.array([complex(z)]))[0])


def _project(w: complex, tol: float) -> complex:
    r = abs(w)
    if r > 1.0 + tol:
        raise DomainError(f"|w| = {r!r} exceeds the closed unit disk")
    return w / r if r > 1.0 else w


def gbk_upper_array(w: np.ndarray, tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """Upper-half-plane branch of the inverse map.

    Returns ``(z, inf_mask)``; ``z`` is 0 where ``inf_mask`` is set.
    """
    w = np.asarray(w, dtype=complex)
    r = np.abs(w)
    if np.any(r > 1.0 + tol):
        raise DomainError("points outside the closed unit disk")
    w = np.where(r > 1.0, w / np.where(r > 1.0, r, 1.0), w)
    a, b = w.real, w.imag
    one_minus = 1.0 - (a * a + b * b)
    on_circle = one_minus <= _SNAP
    c = np.sqrt(np.clip(one_minus, 0.0, None))
    c = np.where(on_circle, 0.0, c)
    inf_mask = on_circle & (np.abs(b) <= _SNAP) & (a > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        interior = (b - 1j * c) / (a - 1.0)
        # on the circle b/(a-1) = -(1+a)/b, which avoids cancellation near w = 1
        boundary = np.where(a > 0, -(1.0 + a) / np.where(b == 0, 1.0, b), b / (a - 1.0))
    z = np.where(on_circle, boundary + 0j, interior)
    z = np.where(inf_mask, 0.0 + 0.0j, z)
    return z, inf_mask


def gbk(w, tol: float = 1e-9) -> tuple[ExtComplex, ...]:
    """Inverse Beltrami-Klein map: the conjugate pair over ``w``, upper point first.

    One point is returned when the preimage is real, and ``(INF,)`` for ``w = 1``.
    Points with ``|w| > 1 + tol`` raise :class:`DomainError`.
    """
    w = _project(complex(w), tol)
    z, inf_mask = gbk_upper_array(np.array([w]), tol)
    if inf_mask[0]:
        return (INF,)
    z = complex(z[0])
    if z.imag == 0.0:
        return (ExtComplex(z.real, 0.0),)
    return ExtComplex(z.real, z.imag), ExtComplex(z.real, -z.imag)


def chordal_distance(a, b) -> float:
    """Chordal distance between points of the unit Riemann sphere; values lie in [0, 2]."""
    a, b = ExtComplex.of(a), ExtComplex.of(b)
    if a.is_inf and b.is_inf:
        return 0.0
    if a.is_inf or b.is_inf:
        z = complex(b if a.is_inf else a)
        return 2.0 / math.sqrt(1.0 + abs(z) ** 2)
    za, zb = complex(a), complex(b)
    return 2.0 * abs(za - zb) / math.sqrt((1.0 + abs(za) ** 2) * (1.0 + abs(zb) ** 2))


def chordal_distance_array(a: np.ndarray, b: np.ndarray, a_inf=None, b_inf=None) -> np.ndarray:
    """Elementwise chordal distance between broadcastable finite arrays with optional inf masks."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    a_inf = np.zeros(a.shape, bool) if a_inf is None else np.asarray(a_inf)
    b_inf = np.zeros(b.shape, bool) if b_inf is None else np.asarray(b_inf)
    aa = np.where(a_inf, 0, a)
    bb = np.where(b_inf, 0, b)
    na = 1.0 + np.abs(aa) ** 2
    nb = 1.0 + np.abs(bb) ** 2
    d = 2.0 * np.abs(aa - bb) / np.sqrt(na * nb)
    d = np.where(a_inf & ~b_inf, 2.0 / np.sqrt(nb), d)
    d = np.where(b_inf & ~a_inf, 2.0 / np.sqrt(na), d)
    return np.where(a_inf & b_inf, 0.0, d)


@dataclass(frozen=True)
class Annulus:
    """Closed ring ``r_min <= |z - center| <= r_max``; ``r_max`` may be ``inf``.

    ``r_min == r_max == inf`` denotes the single point at infinity.
    """

    center: float
    r_min: float
    r_max: float

    def __post_init__(self):
        if not (self.r_min >= 0 and self.r_max >= self.r_min):
            raise ValueError(f"need 0 <= r_min <= r_max, got {self.r_min}, {self.r_max}")
        if math.isinf(self.r_min) and not math.isinf(self.r_max):
            raise ValueError("infinite r_min needs infinite r_max")


def radius_tol(alpha: float, r: float, tol: float = 1e-9) -> float:
    scale = max(1.0, abs(alpha), r if math.isfinite(r) else 1.0)
    return tol * scale


def annulus_contains(a: Annulus, z, tol: float = 1e-9) -> bool:
    z = ExtComplex.of(z)
    if z.is_inf:
        return math.isinf(a.r_max)
    if math.isinf(a.r_min):
        return False
    d = abs(complex(z) - a.center)
    if d < a.r_min - radius_tol(a.center, a.r_min, tol):
        return False
    return math.isinf(a.r_max) or d <= a.r_max + radius_tol(a.center, a.r_max, tol)


@dataclass(frozen=True)
class HalfPlane:
    """Constraint ``normal . w <= offset`` on the Klein disk.

    ``alpha`` and ``side`` ('inner' or 'outer') name the annulus boundary it
    came from; ``ends`` are the chord endpoints on the unit circle.
    """

    normal: tuple[float, float]
    offset: float
    alpha: float = math.nan
    side: str = ""
    ends: tuple[complex, complex] = (0j, 0j)

    def value(self, w) -> np.ndarray | float:
        w = np.asarray(w, dtype=complex)
        return self.normal[0] * w.real + self.normal[1] * w.imag - self.offset

    def contains(self, w, eps: float = _EPS) -> bool:
        return bool(self.value(w) <= eps)


def _circle_chord(alpha: float, r: float, side: str) -> HalfPlane:
    # |z-alpha| <= r  <=>  (1 + r^2 - alpha^2) u + 2 alpha v <= r^2 - alpha^2 - 1
    q = (r - alpha) * (r + alpha)
    nu, nv, c = 1.0 + q, 2.0 * alpha, q - 1.0
    if side == "inner":
        nu, nv, c = -nu, -nv, -c
    norm = math.hypot(nu, nv)
    ends = (fbk(alpha - r), fbk(alpha + r))
    return HalfPlane((nu / norm, nv / norm), c / norm, alpha, side, ends)


def annulus_to_chords(a: Annulus, tol: float = 1e-9) -> list[HalfPlane]:
    """Half-plane constraints whose intersection with the disk is ``fbk(a)``.

    A zero inner radius or an infinite outer radius gives no constraint. A ring
    whose radii agree within tolerance gives the same chord twice with
    opposite orientations.
    """
    if math.isinf(a.r_min):
        return [HalfPlane((-1.0, 0.0), -1.0, a.center, "outer", (1 + 0j, 1 + 0j))]
    r_min, r_max = a.r_min, a.r_max
    if math.isfinite(r_max) and r_max - r_min <= radius_tol(a.center, r_max, tol):
        r_min = r_max = 0.5 * (r_min + r_max)
    out = []
    if r_min > 0:
        out.append(_circle_chord(a.center, r_min, "inner"))
    if math.isfinite(r_max):
        out.append(_circle_chord(a.center, r_max, "outer"))
    return out


# --- convex regions in the Klein disk -------------------------------------------------


@dataclass(frozen=True)
class _Seg:
    p: complex
    q: complex

    def start(self):
        return self.p

    def end(self):
        return self.q


@dataclass(frozen=True)
class _Arc:
    t0: float
    t1: float

    def start(self):
        return complex(math.cos(self.t0), math.sin(self.t0))

    def end(self):
        return complex(math.cos(self.t1), math.sin(self.t1))


@dataclass
class KleinChordRegion:
    """Convex intersection of half-planes with the closed unit disk.

    ``kind`` is one of ``'disk'``, ``'area'``, ``'segment'``, ``'point'`` or
    ``'empty'``. ``pieces`` lists the boundary counter-clockwise as straight
    chords and exact unit-circle arcs.
    """

    constraints: list[HalfPlane]
    kind: str
    pieces: list = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return self.kind == "empty"

    def contains(self, w, eps: float = 1e-9) -> bool:
        if self.empty or abs(w) > 1.0 + eps:
            return False
        return all(h.value(w) <= eps for h in self.constraints)

    def area(self) -> float:
        if self.kind not in ("disk", "area"):
            return 0.0
        total = 0.0
        for pc in self.pieces:
            if isinstance(pc, _Arc):
                total += 0.5 * (pc.t1 - pc.t0)
            else:
                total += 0.5 * (pc.p.real * pc.q.imag - pc.q.real * pc.p.imag)
        return total


def _arc_split(arc: _Arc, h: HalfPlane) -> list[_Arc]:
    nu, nv = h.normal
    c = h.offset
    if abs(c) >= 1.0:
        return [arc]
    phi = math.atan2(nv, nu)
    d = math.acos(c)
    cuts = []
    for t in (phi - d, phi + d):
        k = math.ceil((arc.t0 - t) / TWO_PI)
        t = t + k * TWO_PI
        while t < arc.t1:
            if t - arc.t0 > 1e-15 and arc.t1 - t > 1e-15:
                cuts.append(t)
            t += TWO_PI
    ts = [arc.t0] + sorted(cuts) + [arc.t1]
    return [_Arc(a, b) for a, b in zip(ts[:-1], ts[1:]) if b > a]


def _clip(pieces: list, h: HalfPlane, eps: float) -> list:
    kept = []
    for pc in pieces:
        if isinstance(pc, _Seg):
            fp, fq = float(h.value(pc.p)), float(h.value(pc.q))
            if fp <= eps and fq <= eps:
                kept.append(pc)
            elif fp > eps and fq > eps:
                continue
            else:
                t = fp / (fp - fq)
                x = pc.p + t * (pc.q - pc.p)
                kept.append(_Seg(pc.p, x) if fp <= eps else _Seg(x, pc.q))
        else:
            for sub in _arc_split(pc, h):
                tm = 0.5 * (sub.t0 + sub.t1)
                if h.value(complex(math.cos(tm), math.sin(tm))) <= eps:
                    kept.append(sub)
    kept = [pc for pc in kept if not (isinstance(pc, _Seg) and abs(pc.q - pc.p) < 1e-15)]
    if not kept:
        return []
    out = []
    for i, pc in enumerate(kept):
        out.append(pc)
        nxt = kept[(i + 1) % len(kept)]
        if abs(pc.end() - nxt.start()) > 1e-13:
            out.append(_Seg(pc.end(), nxt.start()))
    return out


def _line_disk_segment(h: HalfPlane) -> tuple[complex, complex] | None:
    nu, nv = h.normal
    c = h.offset
    if abs(c) > 1.0 + 1e-12:
        return None
    c = max(-1.0, min(1.0, c))
    base = complex(nu * c, nv * c)
    s = math.sqrt(max(0.0, 1.0 - c * c))
    tangent = complex(-nv, nu)
    return base - s * tangent, base + s * tangent


def _is_reverse(a: HalfPlane, b: HalfPlane, tol: float = 1e-9) -> bool:
    return (abs(a.normal[0] + b.normal[0]) < tol and abs(a.normal[1] + b.normal[1]) < tol
            and abs(a.offset + b.offset) < tol)


def intersect_region(chords: list[HalfPlane], eps: float = _EPS) -> KleinChordRegion:
    """Intersect half-plane constraints with the closed unit disk.

    Opposing constraint pairs on one line are treated as an equality, so a
    degenerate annulus collapses the region onto its chord (or a point).
    """
    chords = list(chords)
    equalities = []
    for i, a in enumerate(chords):
        for b in chords[i + 1:]:
            if _is_reverse(a, b):
                equalities.append(a)
    if equalities:
        return _intersect_on_line(chords, equalities, eps)
    pieces: list = [_Arc(-math.pi, math.pi)]
    touched = False
    for h in chords:
        if h.offset >= 1.0 - 1e-15:
            continue
        touched = True
        pieces = _clip(pieces, h, eps)
        if not pieces:
            return _point_or_empty(chords, eps)
    if not touched:
        return KleinChordRegion(chords, "disk", pieces)
    region = KleinChordRegion(chords, "area", pieces)
    if region.area() < 1e-24:
        return _collapse(region, eps)
    return region


def _point_or_empty(chords, eps) -> KleinChordRegion:
    # the last clip removed everything; a tangential contact leaves one point
    for h in chords:
        if h.offset <= -1.0 + 1e-12:
            p = complex(-h.normal[0], -h.normal[1])
            if all(g.value(p) <= max(eps, 1e-9) for g in chords):
                return KleinChordRegion(chords, "point", [p])
    return KleinChordRegion(chords, "empty", [])


def _collapse(region: KleinChordRegion, eps) -> KleinChordRegion:
    pts = [pc.start() for pc in region.pieces] + [pc.end() for pc in region.pieces]
    p = pts[0]
    q = max(pts, key=lambda x: abs(x - p))
    if abs(q - p) < 1e-12:
        return KleinChordRegion(region.constraints, "point", [p])
    return KleinChordRegion(region.constraints, "segment", [_Seg(p, q), _Seg(q, p)])


def _intersect_on_line(chords, equalities, eps) -> KleinChordRegion:
    line = equalities[0]
    seg = _line_disk_segment(line)
    if seg is None:
        return KleinChordRegion(chords, "empty", [])
    p, q = seg
    lo, hi = 0.0, 1.0
    d = q - p
    for h in chords:
        fp = float(h.value(p))
        slope = h.normal[0] * d.real + h.normal[1] * d.imag
        # fp + slope * t <= eps
        if abs(slope) < 1e-14:
            if fp > max(eps, 1e-9):
                return KleinChordRegion(chords, "empty", [])
            continue
        t = (eps - fp) / slope
        if slope > 0:
            hi = min(hi, t)
        else:
            lo = max(lo, t)
    if hi < lo - 1e-12:
        return KleinChordRegion(chords, "empty", [])
    a = p + max(0.0, min(1.0, lo)) * d
    b = p + max(0.0, min(1.0, hi)) * d
    if abs(b - a) < 1e-12:
        return KleinChordRegion(chords, "point", [0.5 * (a + b)])
    return KleinChordRegion(chords, "segment", [_Seg(a, b), _Seg(b, a)])


@dataclass
class PlanePath:
    """Boundary of a conjugate-symmetric region of the extended plane.

    ``points[:split]`` traces the closed upper loop (images of the Klein
    boundary under the upper inverse branch); ``points[split:]`` is its mirror.
    ``on_chord[i]`` is False where a vertex comes from a unit-circle arc, i.e.
    lies on the real axis. ``whole_plane`` flags the unconstrained case.
    """

    points: list[ExtComplex]
    on_chord: list[bool]
    split: int
    whole_plane: bool = False
    empty: bool = False

    @property
    def contains_infinity(self) -> bool:
        return any(p.is_inf for p in self.points)

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        z = np.array([0j if p.is_inf else complex(p) for p in self.points], dtype=complex)
        inf = np.array([p.is_inf for p in self.points], dtype=bool)
        return z, inf


def _sample_piece(pc, n: int) -> tuple[np.ndarray, bool]:
    s = np.arange(n) / n
    if isinstance(pc, _Seg):
        # cosine spacing: the inverse map has a square-root singularity at chord ends
        s = 0.5 * (1.0 - np.cos(np.pi * s))
        return pc.p + s * (pc.q - pc.p), True
    ts = pc.t0 + s * (pc.t1 - pc.t0)
    # make sure w = 1 (the point at infinity) is hit exactly when the arc covers it
    k = math.ceil(pc.t0 / TWO_PI)
    t_zero = k * TWO_PI
    if pc.t0 <= t_zero < pc.t1:
        ts = np.sort(np.append(ts, t_zero))
    w = np.exp(1j * ts)
    w[ts == t_zero] = 1.0
    return w, False


def region_boundary_to_plane(r: KleinChordRegion, samples_per_edge: int = 64) -> PlanePath:
    """Map the boundary of a Klein region back to the extended plane.

    Chords become circular arcs centred on the real axis and unit-circle arcs
    become real-axis intervals, possibly running through infinity.
    """
    if r.empty:
        return PlanePath([], [], 0, empty=True)
    if r.kind == "point":
        w = np.array([r.pieces[0]])
        ws, chord = [w], [np.array([True])]
    else:
        ws, chord = [], []
        for pc in r.pieces:
            n = samples_per_edge if isinstance(pc, _Seg) else max(samples_per_edge, int(samples_per_edge * (pc.t1 - pc.t0)))
            w, is_chord = _sample_piece(pc, n)
            ws.append(w)
            chord.append(np.full(w.shape, is_chord))
    w = np.concatenate(ws)
    flags = np.concatenate(chord)
    z, inf = gbk_upper_array(w)
    upper = [INF if i else ExtComplex(float(c.real), float(c.imag)) for c, i in zip(z, inf)]
    lower = [p.conjugate() for p in reversed(upper)]
    on_chord = [bool(f) for f in flags]
    return PlanePath(upper + lower, on_chord + on_chord[::-1], len(upper), whole_plane=r.kind == "disk")
