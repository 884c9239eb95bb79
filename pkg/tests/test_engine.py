import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from oracles import circle_path, lattice
from srgkit.engine import (
    SrgComputationError,
    SrgRegion,
    chordal_hausdorff,
    compute_region,
    finalize,
    gap_scores,
    make_alpha_grid,
    region_boundary,
    region_contains,
    region_from_dict,
    region_refine,
    region_to_dict,
    region_to_json,
)
from srgkit.gains import FrequencyGainProvider, GainPair, GainProvider, MatrixGainProvider
from srgkit.gains.matrix import srg_sample_matrix_array
from srgkit.geometry import INF, fbk_array, gbk_upper_array


class FaultyProvider(GainProvider):
    """Wraps a provider and fails at selected alphas."""

    kind = "faulty"

    def __init__(self, inner, bad):
        self.inner, self.bad = inner, bad

    def gains(self, alpha):
        if self.bad(alpha):
            raise ArithmeticError("synthetic failure")
        return self.inner.gains(alpha)

    def scale(self):
        return self.inner.scale()

    def center(self):
        return self.inner.center()


class ConstantProvider(GainProvider):
    """Inconsistent gains: the same ring for every alpha."""

    kind = "constant"

    def gains(self, alpha):
        return GainPair(0.0, 0.1)


@pytest.fixture(scope="module")
def diag_region():
    return compute_region(MatrixGainProvider(np.diag([1.0, 2.0])), 33)


@pytest.fixture(scope="module")
def t3_soft(t3):
    return compute_region(FrequencyGainProvider(t3, "soft"), 65)


@pytest.fixture(scope="module")
def t3_hard(t3):
    return compute_region(FrequencyGainProvider(t3, "hard"), 65)


class TestGrid:
    def test_n3(self):
        assert_allclose(make_alpha_grid(3), [-math.tan(5 * math.pi / 12), 0, math.tan(5 * math.pi / 12)],
                        rtol=1e-15, atol=1e-300)
        assert_allclose(make_alpha_grid(3)[2], 3.7320508075688767, rtol=1e-15)

    @pytest.mark.parametrize("n", [3, 4, 9, 64, 1001])
    def test_finite_sorted_symmetric(self, n):
        a = make_alpha_grid(n, 2.5)
        assert np.all(np.isfinite(a)) and np.all(np.diff(a) > 0) and a.size == n
        assert_allclose(a, -a[::-1], atol=1e-12)

    @pytest.mark.parametrize("n", [3, 8, 33])
    def test_interleaving(self, n):
        g, fine = make_alpha_grid(n), make_alpha_grid(2 * n + 1)
        assert fine[0] < g[0] and fine[-1] > g[-1]
        # every gap of the coarse grid contains at least one fine point
        for lo, hi in zip(g[:-1], g[1:]):
            assert np.any((fine > lo) & (fine < hi))

    def test_center_offset(self):
        a = make_alpha_grid(5, 1.0, 1.5)
        assert a[2] == 1.5

    def test_errors(self):
        with pytest.raises(ValueError):
            make_alpha_grid(2)
        with pytest.raises(ValueError):
            make_alpha_grid(5, 0.0)


class TestRegions:
    def test_diag_circle(self, diag_region):
        r = diag_region
        assert not r.includes_infinity
        assert chordal_hausdorff(region_boundary(r, 2048), circle_path(1.5, 0.5)) < 1e-6

    def test_diag_membership(self, diag_region):
        assert region_contains(diag_region, 1.5 + 0.5j)
        assert not region_contains(diag_region, 1.5)
        assert not region_contains(diag_region, INF)

    def test_scaled_identity_point(self):
        r = compute_region(MatrixGainProvider(3 * np.eye(2)), 9)
        assert r.point == 3 and region_contains(r, 3.0) and not region_contains(r, 3.1)

    def test_integrator_soft(self, t3_soft):
        r = t3_soft
        assert r.includes_infinity
        assert region_contains(r, 2j) and not region_contains(r, 1 + 1j) and region_contains(r, INF)
        z = lattice(-3, 3, 101)
        got = region_contains(r, z)
        band = np.abs(z.real) <= 1e-3
        assert np.array_equal(got[~band], np.zeros((~band).sum(), bool))
        assert np.all(got[np.abs(z.real) < 1e-12])

    def test_integrator_hard(self, t3_hard):
        r = t3_hard
        assert r.includes_infinity
        z = lattice(-3, 3, 101)
        assert np.array_equal(region_contains(r, z), z.real >= -1e-3)
        path = region_boundary(r)
        assert path.contains_infinity
        bz, binf = path.as_arrays()
        chord = np.array(path.on_chord) & ~binf
        # chord vertices approach the imaginary axis from the left: a finite grid leaves the sliver
        # y^2 <= 2 |alpha_min| |x| - x^2 uncovered; the other vertices are the real-axis fold of the disk arc
        zc = bz[chord]
        assert np.all(zc.real <= 1e-9)
        a0 = abs(r.alphas[0])
        assert np.all(zc.imag ** 2 >= (2 * a0 * np.abs(zc.real) - zc.real ** 2) * (1 - 1e-6) - 1e-9)
        assert np.all(np.abs(bz[~chord & ~binf].imag) < 1e-12)

    def test_contains_vectorized(self, diag_region):
        z = np.array([1.5 + 0.5j, 1.5, np.inf])
        assert region_contains(diag_region, z).tolist() == [True, False, False]
        assert region_contains(diag_region, z[:1], inf_mask=[True]).tolist() == [False]

    def test_over_approximation(self, diag_region):
        M = np.array([[1.0, 2.0, 0.0], [0.0, -1.0, 1.0], [0.5, 0.0, 2.0]])
        r = compute_region(MatrixGainProvider(M), 33)
        z = srg_sample_matrix_array(M, 3000, seed=11)
        assert np.all(region_contains(r, np.concatenate([z, z.conj()]), tol=1e-6))

    def test_symmetry(self, t3_hard, diag_region, rng):
        z = rng.standard_normal(500) * 2 + 1j * rng.standard_normal(500) * 2
        for r in (t3_hard, diag_region):
            assert np.array_equal(region_contains(r, z), region_contains(r, z.conj()))

    def test_klein_convexity(self, rng):
        M = rng.standard_normal((3, 3))
        r = compute_region(MatrixGainProvider(M), 17)
        z = lattice(-4, 4, 61)
        pos = z[region_contains(r, z)]
        assert pos.size > 10
        w = fbk_array(pos)
        i, j = rng.integers(0, w.size, (2, 2000))
        mid, _ = gbk_upper_array(0.5 * (w[i] + w[j]))
        assert np.all(region_contains(r, mid, tol=1e-7))

    def test_grid_monotonicity(self, rng):
        """Adding grid points can only shrink the region."""
        p = MatrixGainProvider(rng.standard_normal((3, 3)))
        coarse = compute_region(p, 5)
        alphas = np.union1d(coarse.alphas, make_alpha_grid(11, p.scale(), p.center()))
        finer = finalize(SrgRegion(alphas, tuple(p.gains(a) for a in alphas), False))
        z = lattice(-4, 4, 41)
        assert np.all(region_contains(coarse, z) >= region_contains(finer, z))

    def test_failed_alphas_are_dropped(self):
        base = MatrixGainProvider(np.diag([1.0, 2.0]))
        p = FaultyProvider(base, lambda a: a > 2.0)
        r = compute_region(p, 33)
        assert r.errors and all(e.alpha > 2.0 for e in r.errors)
        assert r.alphas.size + len(r.errors) == 33
        full = compute_region(base, 33)
        z = lattice(0, 3, 41)
        assert np.all(region_contains(r, z) >= region_contains(full, z))
        with pytest.raises(SrgComputationError):
            compute_region(FaultyProvider(base, lambda a: True), 5)

    def test_empty_diagnostic(self):
        r = compute_region(ConstantProvider(), 9)
        assert r.empty and "inconsistent" in r.diagnostic
        assert not region_contains(r, 0.0) and region_boundary(r).empty

    def test_threads_deterministic(self, t3):
        p = FrequencyGainProvider(t3, "soft")
        a = region_to_json(compute_region(p, 17, threads=1))
        b = region_to_json(compute_region(p, 17, threads=4))
        assert a == b


class TestRefine:
    def test_subset(self, rng):
        p = MatrixGainProvider(rng.standard_normal((3, 3)))
        r0 = compute_region(p, 9)
        r1 = region_refine(r0, p)
        assert r1.alphas.size > r0.alphas.size and r1.provenance["refinements"] == 1
        z = rng.uniform(-4, 4, 1000) + 1j * rng.uniform(-4, 4, 1000)
        assert np.all(region_contains(r0, z) >= region_contains(r1, z))

    def test_hausdorff_decreases(self):
        p = MatrixGainProvider(np.diag([1.0, 2.0]))
        oracle = circle_path(1.5, 0.5)
        r = compute_region(p, 4)  # even grid: the exact alpha=1.5 is not on it
        dists = [chordal_hausdorff(region_boundary(r, 256), oracle)]
        for _ in range(3):
            r = region_refine(r, p)
            dists.append(chordal_hausdorff(region_boundary(r, 256), oracle))
        assert all(b <= a + 1e-12 for a, b in zip(dists, dists[1:]))
        assert dists[-1] < dists[0]

    def test_fixed_point(self):
        p = MatrixGainProvider(2.0 * np.eye(2))
        r = compute_region(p, 5)
        for _ in range(2):
            r = region_refine(r, p)
            assert r.point == 2.0

    def test_gap_scores_nonnegative(self, t3_soft):
        s = gap_scores(t3_soft)
        assert s.size == t3_soft.alphas.size - 1 and np.all(s >= 0)


class TestSerialization:
    def test_round_trip(self, t3_hard, diag_region):
        for r in (t3_hard, diag_region):
            d = json.loads(region_to_json(r))
            r2 = region_from_dict(d)
            assert region_to_dict(r2) == d
            z = lattice(-3, 3, 31)
            assert np.array_equal(region_contains(r, z), region_contains(r2, z))

    def test_inf_encoding(self, t3_soft):
        d = region_to_dict(t3_soft)
        assert set(d["rmax"]) == {"inf"} and d["includes_infinity"] is True
        assert ["inf", "inf"] in d["boundary"]
        assert d["provenance"]["grid"] == "tan" and d["provenance"]["n"] == 65


@given(st.floats(-3, 3), st.floats(0.01, 3))
def test_membership_matches_annuli(x, y):
    """Region membership agrees with the explicit annulus intersection."""
    M = np.array([[1.0, 1.0], [0.0, 2.0]])
    r = compute_region(MatrixGainProvider(M), 9)
    z = complex(x, y)
    inside = all(g.min_gain - 1e-9 <= abs(z - a) <= g.max_gain + 1e-9 for a, g in zip(r.alphas, r.gains))
    if min(abs(abs(z - a) - g.min_gain) for a, g in zip(r.alphas, r.gains)) > 1e-6 and \
            min(abs(abs(z - a) - g.max_gain) for a, g in zip(r.alphas, r.gains)) > 1e-6:
        assert region_contains(r, z) == inside
