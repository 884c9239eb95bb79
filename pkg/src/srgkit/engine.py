"""Scaled relative graph regions as finite intersections of annuli.

For every ``alpha`` on a grid the gain provider returns the extreme gains of
``T - alpha*I``; each pair defines the ring ``Ann(alpha)`` centred at ``alpha``
and the region is the intersection of all rings. In the Beltrami-Klein disk
every ring is a pair of half-planes, so the intersection is convex and its
boundary is exact up to sampling.
"""

from __future__ import annotations

import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .gains import GainPair, GainProvider, Witness
from .geometry import (
    Annulus,
    ExtComplex,
    KleinChordRegion,
    PlanePath,
    annulus_to_chords,
    chordal_distance_array,
    intersect_region,
    radius_tol,
    region_boundary_to_plane,
)

log = logging.getLogger(__name__)

#: relative tolerance for membership tests
MEMBERSHIP_TOL = 1e-9

# witness attached to infinite gains read back from a file
INF_WITNESS = Witness("stored")


class SrgComputationError(ArithmeticError):
    """Every gain query failed; the message names the first failing alpha."""


def make_alpha_grid(n: int, scale: float = 1.0, center: float = 0.0) -> np.ndarray:
    """Tangent-law grid ``center + scale*tan(theta_k)``.

    ``theta_k`` are ``n`` equispaced angles on ``[-pi/2 + d, pi/2 - d]`` with
    ``d = pi/(4n)``, so the chords contributed by each ``alpha`` are spread
    evenly in angle over the Klein disk. For odd ``n`` the grid contains
    ``center`` itself.

    Examples
    --------
    >>> np.round(make_alpha_grid(3), 3)
    array([-3.732,  0.   ,  3.732])
    """
    if n < 3:
        raise ValueError(f"alpha grid needs n >= 3, got {n}")
    if not (scale > 0 and math.isfinite(scale)):
        raise ValueError(f"scale must be positive and finite, got {scale}")
    d = math.pi / (4 * n)
    theta = np.linspace(-math.pi / 2 + d, math.pi / 2 - d, n)
    t = np.tan(theta)
    if n % 2:
        t[n // 2] = 0.0
    return center + scale * t


def _grid_angles(alphas, scale, center) -> np.ndarray:
    return np.arctan((np.asarray(alphas) - center) / scale)


def _grid_from_angles(theta, scale, center) -> np.ndarray:
    return center + scale * np.tan(theta)


@dataclass(frozen=True)
class AlphaError:
    alpha: float
    stage: str
    message: str

    def __str__(self):
        return f"alpha={self.alpha:.12g} ({self.stage}): {self.message}"


@dataclass(frozen=True, eq=False)
class SrgRegion:
    """Finite-grid over-approximation of the SRG closure.

    ``alphas`` and ``gains`` only hold the grid points whose query succeeded;
    the failed ones are listed in ``errors``.
    """

    alphas: np.ndarray
    gains: tuple[GainPair, ...]
    includes_infinity: bool
    boundary: PlanePath | None = None
    klein: KleinChordRegion | None = None
    provenance: dict = field(default_factory=dict)
    errors: tuple[AlphaError, ...] = ()
    diagnostic: str = ""

    @property
    def rmin(self) -> np.ndarray:
        return np.array([g.min_gain for g in self.gains], dtype=float)

    @property
    def rmax(self) -> np.ndarray:
        return np.array([g.max_gain for g in self.gains], dtype=float)

    @property
    def annuli(self) -> list[Annulus]:
        return [Annulus(float(a), g.min_gain, g.max_gain) for a, g in zip(self.alphas, self.gains)]

    @property
    def empty(self) -> bool:
        return self.klein is not None and self.klein.empty

    @property
    def point(self) -> complex | None:
        """The single point of a degenerate region, else None."""
        if self.klein is not None and self.klein.kind == "point":
            p = self.boundary.points[0]
            return None if p.is_inf else complex(p)
        return None


def _thread_count(threads: int | None) -> int:
    if threads is None:
        try:
            threads = int(os.environ.get("SRG_THREADS", "1"))
        except ValueError:
            threads = 1
    return max(1, threads)


def _query_all(p: GainProvider, alphas, threads) -> list[GainPair | AlphaError]:
    def one(a):
        try:
            return p.gains(float(a))
        except Exception as exc:  # noqa: BLE001 -- any failure only drops this annulus
            log.warning("gain query failed at alpha=%g: %s", a, exc)
            return AlphaError(float(a), f"{p.kind}/{p.mode} gains", f"{type(exc).__name__}: {exc}")

    n = _thread_count(threads)
    if n == 1:
        return [one(a) for a in alphas]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(one, alphas))


def compute_region(p: GainProvider, n: int, scale: float | None = None, center: float | None = None,
                   threads: int | None = None, samples_per_edge: int = 64) -> SrgRegion:
    """Sweep the alpha grid, query ``p`` and assemble the region.

    Parameters
    ----------
    p : GainProvider
    n : int
        Number of grid points (``>= 3``).
    scale, center : float, optional
        Grid parameters; default to ``p.scale()`` and ``p.center()``.
    threads : int, optional
        Concurrent gain queries; defaults to ``$SRG_THREADS`` or 1.
    """
    scale = p.scale() if scale is None else scale
    center = p.center() if center is None else center
    alphas = make_alpha_grid(n, scale, center)
    prov = {"provider": p.metadata(), "n": int(n), "scale": float(scale), "center": float(center),
            "grid": "tan", "membership_tol": MEMBERSHIP_TOL, "samples_per_edge": samples_per_edge,
            "refinements": 0}
    return _assemble(p, alphas, _query_all(p, alphas, threads), prov, samples_per_edge)


def _assemble(p, alphas, results, prov, samples_per_edge) -> SrgRegion:
    keep_a, keep_g, errs = [], [], []
    for a, r in zip(alphas, results):
        if isinstance(r, AlphaError):
            errs.append(r)
        else:
            keep_a.append(float(a))
            keep_g.append(r)
    if not keep_g and errs:
        raise SrgComputationError(f"all gain queries failed; first: {errs[0]}")
    order = np.argsort(keep_a, kind="stable")
    a = np.array(keep_a)[order]
    g = tuple(keep_g[i] for i in order)
    includes_inf = all(math.isinf(x.max_gain) for x in g)
    region = SrgRegion(a, g, includes_inf, provenance=dict(prov), errors=tuple(errs))
    return finalize(region, samples_per_edge)


def _degenerate_point(r: SrgRegion) -> float | None:
    for a, g in zip(r.alphas, r.gains):
        if g.max_gain <= radius_tol(a, 0.0, MEMBERSHIP_TOL):
            return float(a)
    return None


def finalize(r: SrgRegion, samples_per_edge: int = 64) -> SrgRegion:
    """Attach the Klein region and boundary path to ``r``."""
    diag = ""
    pt = _degenerate_point(r)
    if pt is not None:
        # T - alpha I vanishes: the ring is the single point alpha, which has no chord
        ok = bool(region_contains(r, pt))
        w = complex((pt * pt - 1.0) / (1.0 + pt * pt), -2.0 * pt / (1.0 + pt * pt))
        klein = KleinChordRegion([], "point", [w]) if ok else KleinChordRegion([], "empty", [])
        boundary = (PlanePath([ExtComplex(pt, 0.0)], [True], 1) if ok
                    else PlanePath([], [], 0, empty=True))
    else:
        chords = [h for ann in r.annuli for h in annulus_to_chords(ann)]
        klein = intersect_region(chords)
        boundary = region_boundary_to_plane(klein, samples_per_edge)
    if klein.empty:
        diag = ("empty intersection of annuli: provider gains are inconsistent "
                "(some ring excludes every point allowed by the others)")
        log.warning(diag)
    return SrgRegion(r.alphas, r.gains, r.includes_infinity, boundary, klein, r.provenance, r.errors, diag)


def region_boundary(r: SrgRegion, samples_per_edge: int = 64) -> PlanePath:
    """Boundary of ``r`` as a closed, conjugate-symmetric path (empty path if the region is empty)."""
    if r.boundary is not None and samples_per_edge == r.provenance.get("samples_per_edge", 64):
        return r.boundary
    if r.klein is not None and r.klein.kind != "point":
        return region_boundary_to_plane(r.klein, samples_per_edge)
    return finalize(r, samples_per_edge).boundary


def _as_points(z, inf_mask=None):
    if isinstance(z, ExtComplex):
        return np.array([0j if z.is_inf else complex(z)]), np.array([z.is_inf]), True
    if np.isscalar(z):
        zc = complex(z)
        is_inf = not (math.isfinite(zc.real) and math.isfinite(zc.imag))
        return np.array([0j if is_inf else zc]), np.array([is_inf]), True
    arr = np.asarray(z)
    if arr.dtype == object:
        pts = [ExtComplex.of(x) for x in arr.ravel()]
        zz = np.array([0j if p.is_inf else complex(p) for p in pts])
        mask = np.array([p.is_inf for p in pts], dtype=bool)
        return zz, mask, False
    zz = np.asarray(arr, dtype=complex).ravel()
    mask = ~np.isfinite(zz)
    if inf_mask is not None:
        mask = mask | np.asarray(inf_mask, dtype=bool).ravel()
    return np.where(mask, 0j, zz), mask, False


def region_contains(r: SrgRegion, z, inf_mask=None, tol: float = MEMBERSHIP_TOL):
    """Membership in every stored annulus.

    ``z`` may be an :class:`ExtComplex`, a complex scalar or an array of
    complex values (non-finite entries, or those flagged by ``inf_mask``, are
    the point at infinity). Returns a bool for scalars, else a bool array.
    """
    zz, mask, scalar = _as_points(z, inf_mask)
    ok = np.ones(zz.shape, dtype=bool)
    for a, g in zip(r.alphas, r.gains):
        d = np.abs(zz - a)
        if g.min_gain > 0:
            ok &= d >= g.min_gain - radius_tol(a, g.min_gain, tol)
        if math.isfinite(g.max_gain):
            ok &= d <= g.max_gain + radius_tol(a, g.max_gain, tol)
    ok = np.where(mask, r.includes_infinity, ok)
    return bool(ok[0]) if scalar else ok


def boundary_distance(r: SrgRegion, z, inf_mask=None, samples_per_edge: int = 1024) -> np.ndarray:
    """Chordal distance from each point to the (densely sampled) boundary path."""
    zz, mask, _ = _as_points(z, inf_mask)
    path = region_boundary(r, samples_per_edge)
    if path.empty or not path.points:
        return np.full(zz.shape, math.inf)
    bz, binf = path.as_arrays()
    out = np.empty(zz.shape)
    for k in range(0, zz.size, 256):
        sl = slice(k, k + 256)
        d = chordal_distance_array(zz[sl, None], bz[None, :], mask[sl, None], binf[None, :])
        out[sl] = d.min(axis=1)
    return out


def region_contains_within(r: SrgRegion, z, tol: float, inf_mask=None) -> np.ndarray:
    """Membership, or chordal distance to the boundary at most ``tol``."""
    inside = np.atleast_1d(region_contains(r, z, inf_mask))
    if r.klein is not None and r.klein.kind == "disk":
        return inside
    out = inside.copy()
    if not np.all(inside):
        zz, mask, _ = _as_points(z, inf_mask)
        out[~inside] = boundary_distance(r, zz[~inside], mask[~inside]) <= tol
    return out


def _closed_segments(z: np.ndarray, inf: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Finite segments of the closed polyline through ``z`` (edges touching infinity dropped)."""
    a, b = z, np.roll(z, -1)
    ok = ~inf & ~np.roll(inf, -1)
    return a[ok], b[ok]


def _distance_to_path(z: np.ndarray, zinf: np.ndarray, path: PlanePath, chunk: int = 128) -> np.ndarray:
    """Chordal distance from points to a sampled path, using its vertices and edges.

    Each point is projected (in the plane) onto every finite edge; the chordal
    distance to the projection is second-order accurate for short edges and
    removes the vertex-spacing floor of a vertex-only comparison.
    """
    bz, binf = path.as_arrays()
    sa, sb = _closed_segments(bz, binf)
    d_seg = sb - sa
    len2 = np.maximum(np.abs(d_seg) ** 2, 1e-300)
    out = np.empty(z.shape)
    for k in range(0, z.size, chunk):
        sl = slice(k, k + chunk)
        d = chordal_distance_array(z[sl, None], bz[None, :], zinf[sl, None], binf[None, :]).min(axis=1)
        if sa.size:
            t = np.clip(((z[sl, None] - sa[None, :]) * d_seg.conj()[None, :]).real / len2[None, :], 0.0, 1.0)
            proj = sa[None, :] + t * d_seg[None, :]
            ds = chordal_distance_array(z[sl, None], proj, zinf[sl, None], np.zeros(proj.shape, bool))
            d = np.minimum(d, ds.min(axis=1))
        out[sl] = d
    return out


def chordal_hausdorff(a: PlanePath, b: PlanePath) -> float:
    """Symmetric Hausdorff distance between two sampled closed paths in the chordal metric.

    Distances are measured from the vertices of one path to the polyline
    (vertices and edges) of the other.
    """
    az, ai = a.as_arrays()
    bz, bi = b.as_arrays()
    return float(max(_distance_to_path(az, ai, b).max(), _distance_to_path(bz, bi, a).max()))


# --- refinement ------------------------------------------------------------------------


def _klein_area(chords) -> float:
    return intersect_region(chords).area()


def gap_scores(r: SrgRegion) -> np.ndarray:
    """Klein-disk area of the symmetric difference of adjacent annuli."""
    chords = [annulus_to_chords(a) for a in r.annuli]
    areas = [_klein_area(c) for c in chords]
    out = np.zeros(max(len(chords) - 1, 0))
    for i in range(len(out)):
        both = _klein_area(chords[i] + chords[i + 1])
        out[i] = max(areas[i] + areas[i + 1] - 2.0 * both, 0.0)
    return out


def region_refine(r: SrgRegion, p: GainProvider, threads: int | None = None) -> SrgRegion:
    """Insert grid points where adjacent annuli disagree most.

    New angles are midpoints (in the tangent-law angle) of the gaps whose
    symmetric-difference score is at least the median positive score, plus one
    point beyond each end of the grid. All old constraints are kept, so the
    refined region is contained in ``r``.
    """
    scale = r.provenance.get("scale", p.scale())
    center = r.provenance.get("center", p.center())
    spe = r.provenance.get("samples_per_edge", 64)
    theta = _grid_angles(r.alphas, scale, center)
    scores = gap_scores(r)
    new = []
    pos = scores[scores > 0]
    if pos.size:
        cut = np.median(pos)
        for i in np.flatnonzero(scores >= cut):
            new.append(0.5 * (theta[i] + theta[i + 1]))
    if theta.size:
        new.append(0.5 * (theta[0] - math.pi / 2))
        new.append(0.5 * (theta[-1] + math.pi / 2))
    new_alpha = _grid_from_angles(np.array(new), scale, center)
    new_alpha = new_alpha[np.isfinite(new_alpha) & ~np.isin(new_alpha, r.alphas)]
    results = list(r.gains) + _query_all(p, new_alpha, threads)
    alphas = np.concatenate([r.alphas, new_alpha])
    prov = dict(r.provenance)
    prov["refinements"] = int(prov.get("refinements", 0)) + 1
    prov["n"] = int(alphas.size + len(r.errors))
    region = _assemble(p, alphas, results, prov, spe)
    return SrgRegion(region.alphas, region.gains, region.includes_infinity, region.boundary, region.klein,
                     region.provenance, r.errors + region.errors, region.diagnostic)


# --- serialization ---------------------------------------------------------------------


def _num(x: float):
    return "inf" if math.isinf(x) else float(x)


def _unnum(x) -> float:
    return math.inf if x == "inf" else float(x)


def region_to_dict(r: SrgRegion) -> dict:
    path = r.boundary.points if r.boundary is not None else []
    return {
        "alpha": [float(a) for a in r.alphas],
        "rmin": [_num(g.min_gain) for g in r.gains],
        "rmax": [_num(g.max_gain) for g in r.gains],
        "includes_infinity": bool(r.includes_infinity),
        "boundary": [["inf", "inf"] if q.is_inf else [q.re, q.im] for q in path],
        "provenance": {**r.provenance, "errors": [str(e) for e in r.errors],
                       **({"diagnostic": r.diagnostic} if r.diagnostic else {})},
    }


def region_to_json(r: SrgRegion) -> str:
    return json.dumps(region_to_dict(r), indent=2) + "\n"


def region_from_dict(d: dict) -> SrgRegion:
    """Rebuild a region (gains, membership and boundary) from its serialized form."""
    gains = []
    for lo, hi in zip(d["rmin"], d["rmax"]):
        hi_v = _unnum(hi)
        gains.append(GainPair(_unnum(lo), hi_v, max_witness=INF_WITNESS if math.isinf(hi_v) else None))
    prov = {k: v for k, v in d.get("provenance", {}).items() if k not in ("errors", "diagnostic")}
    r = SrgRegion(np.array(d["alpha"], dtype=float), tuple(gains), bool(d["includes_infinity"]), provenance=prov)
    return finalize(r, prov.get("samples_per_edge", 64))


__all__ = [
    "AlphaError",
    "SrgComputationError",
    "SrgRegion",
    "boundary_distance",
    "chordal_hausdorff",
    "compute_region",
    "finalize",
    "gap_scores",
    "make_alpha_grid",
    "region_boundary",
    "region_contains",
    "region_contains_within",
    "region_from_dict",
    "region_refine",
    "region_to_dict",
    "region_to_json",
]
