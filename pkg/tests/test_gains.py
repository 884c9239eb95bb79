import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from srgkit.gains import (
    BoundedRealGainProvider,
    BrlQuery,
    FrequencyGainProvider,
    FrequencyGrid,
    GainPair,
    MatrixGainProvider,
    Witness,
    brl_max_gain,
    brl_min_gain,
    hard_gains,
    make_frequency_grid,
    matrix_gains,
    refine_peak,
    soft_gains,
    srg_sample_matrix,
)
from srgkit.gains.bounded_real import _imag_eigs, hamiltonian
from srgkit.gains.matrix import srg_sample_matrix_array
from srgkit.geometry import Annulus, annulus_contains
from srgkit.lti import (
    DelayNotSupportedError,
    RationalDelayEntry,
    StateSpace,
    TransferMatrix,
    invert,
    realize,
)


def dense_axis_extremes(f, omega_max=1e6, n=10**6):
    """Brute-force oracle: extremes of |f(i w)| on a dense mixed grid."""
    w = np.concatenate([np.linspace(0, 10, n // 2), np.geomspace(1e-6, omega_max, n // 2)])
    v = np.abs(f(1j * w))
    return v.min(), v.max(), w, v


def random_stable_ss(rng, n, m):
    A = rng.standard_normal((n, n))
    A -= (np.max(np.linalg.eigvals(A).real) + rng.uniform(0.1, 2.0)) * np.eye(n)
    return StateSpace(A, rng.standard_normal((n, m)), rng.standard_normal((m, n)), rng.standard_normal((m, m)))


def random_rational(rng, m, stable):
    """m x m transfer matrix with proper first/second-order entries."""
    rows = []
    for _ in range(m):
        row = []
        for _ in range(m):
            p = rng.uniform(0.2, 3.0) * (-1 if stable or rng.random() < 0.5 else 1)
            if rng.random() < 0.5:
                row.append(RationalDelayEntry((rng.standard_normal(),), (-p, 1.0)))
            else:
                q = rng.uniform(0.2, 3.0)
                row.append(RationalDelayEntry(tuple(rng.standard_normal(2)), (q * q, 2 * 0.3 * q, 1.0)))
        rows.append(tuple(row))
    return TransferMatrix(tuple(rows))


class TestGainPair:
    def test_invariants(self):
        with pytest.raises(ValueError):
            GainPair(2.0, 1.0)
        with pytest.raises(ValueError):
            GainPair(0.0, math.inf)
        assert GainPair(1.0 + 1e-15, 1.0).min_gain == 1.0

    def test_witness_text(self):
        assert str(Witness("pole", 1 + 0j)) == "pole=1"
        assert str(Witness("pole", -0.0 + 0j)) == "pole=0"
        assert str(Witness("singular-D")) == "singular-D"


class TestMatrix:
    @pytest.mark.parametrize("M, alpha, expected", [
        (np.diag([1.0, 2.0]), 1.5, (0.5, 0.5)),
        (np.eye(2), 0.0, (1.0, 1.0)),
        (np.array([[0.0, 1.0], [0.0, 0.0]]), 0.0, (0.0, 1.0)),
    ])
    def test_examples(self, M, alpha, expected):
        assert_allclose(matrix_gains(M, alpha), expected, atol=1e-15)

    @pytest.mark.parametrize("c", [1.0, 3.0])
    def test_scaled_identity_samples(self, c):
        pts = srg_sample_matrix(c * np.eye(3), 50, seed=1)
        assert len(pts) == 100
        assert_allclose([complex(p) for p in pts], c, atol=1e-12)

    def test_diag_samples_on_circle(self):
        z = srg_sample_matrix_array(np.diag([1.0, 2.0]), 10**4, seed=7)
        assert np.max(np.abs(np.abs(z - 1.5) - 0.5)) <= 1e-9

    def test_samples_in_all_annuli(self, rng):
        M = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        pts = srg_sample_matrix(M, 500, seed=3)
        for a in np.linspace(-4, 4, 33):
            lo, hi = matrix_gains(M, a)
            ann = Annulus(a, lo, hi)
            assert all(annulus_contains(ann, p, tol=1e-8) for p in pts)

    def test_sampling_deterministic(self):
        a = srg_sample_matrix_array(np.diag([1.0, 2.0]), 20, seed=5)
        b = srg_sample_matrix_array(np.diag([1.0, 2.0]), 20, seed=5)
        assert np.array_equal(a, b)

    @given(st.floats(-10, 10), st.floats(-10, 10), st.integers(0, 1000))
    def test_lipschitz_in_alpha(self, a, b, seed):
        M = np.random.default_rng(seed).standard_normal((3, 3))
        ga, gb = np.array(matrix_gains(M, a)), np.array(matrix_gains(M, b))
        assert np.all(np.abs(ga - gb) <= abs(a - b) + 1e-12)

    def test_provider(self):
        p = MatrixGainProvider(np.diag([1.0, 2.0]))
        assert p.center() == 1.5
        g = p.gains(1.5)
        assert g.min_gain == g.max_gain == 0.5
        with pytest.raises(ValueError):
            MatrixGainProvider(np.ones((2, 3)))


class TestFrequencyGrid:
    def test_validation(self):
        with pytest.raises(ValueError):
            FrequencyGrid(np.linspace(0, 1, 10), 1.0)
        with pytest.raises(ValueError):
            FrequencyGrid(np.concatenate([[1.0], np.linspace(0, 1, 100)]), 1.0)

    def test_default_grid(self, t2, t1):
        g = make_frequency_grid(t2)
        assert g.omega[0] == 0 and g.omega.size >= 64
        assert np.all(np.diff(g.omega) > 0)
        gd = make_frequency_grid(t1)
        assert gd.omega_max >= 64 * np.pi / 1.0


class TestRefinePeak:
    def test_first_order(self):
        x, v = refine_peak(lambda w: 1 / abs(1j * w + 1), (0.0, 2.0))
        assert abs(x) < 1e-7 and abs(v - 1) < 1e-12

    def test_constant(self):
        x, v = refine_peak(lambda w: 3.0, (1.0, 2.0))
        assert (x, v) == (1.5, 3.0)

    def test_interior_peak_against_dense_grid(self):
        f = lambda w: abs(1 / ((1j * w) ** 2 + 0.2 * 1j * w + 1))  # noqa: E731
        x, v = refine_peak(f, (0.5, 1.5))
        w = np.linspace(0.5, 1.5, 10**6)
        dense = np.max(np.abs(1 / ((1j * w) ** 2 + 0.2 * 1j * w + 1)))
        assert abs(v - dense) <= 1e-6 * dense and v >= dense - 1e-12

    def test_minimize(self):
        x, v = refine_peak(lambda w: (w - 0.3) ** 2, (0.0, 1.0), maximize=False)
        assert abs(x - 0.3) < 1e-7


class TestSoftGains:
    def test_integrator(self, t3):
        g = soft_gains(t3, 2.0)
        assert g.min_gain == pytest.approx(2.0, abs=1e-12) and g.max_gain == math.inf
        assert g.max_witness.kind == "pole"
        # oracle: sqrt(4 + 1/w^2) decreases monotonically to 2
        w = np.geomspace(1e-3, 1e6, 1000)
        v = np.abs(1 / (1j * w) - 2)
        assert np.all(np.diff(v) < 0) and v[-1] - 2 < 1e-11

    def test_first_order(self, first_order):
        g = soft_gains(first_order, 0.0)
        assert g.min_gain == pytest.approx(0.0, abs=1e-12)
        assert g.max_gain == pytest.approx(1.0, abs=1e-12)

    def test_delay_model_against_dense_grid(self, t1):
        g = soft_gains(t1, 0.0)
        lo, hi, _, _ = dense_axis_extremes(lambda s: np.exp(-s) / (s + 1))
        assert g.max_gain == pytest.approx(hi, abs=1e-9)
        assert g.min_gain <= lo + 1e-12 and g.min_gain == pytest.approx(0.0, abs=1e-12)

    def test_t2_max_against_dense_grid(self, t2):
        g = soft_gains(t2, 0.0)
        w = np.concatenate([np.linspace(0, 10, 500000), np.geomspace(1e-6, 1e6, 500000)])
        s = 1j * w
        G = np.empty((w.size, 2, 2), complex)
        G[:, 0, 0], G[:, 0, 1] = 1 / (s - 1), s / (s - 1)
        G[:, 1, 0], G[:, 1, 1] = (s + 1) / (s + 3), 1 / (s + 2)
        sv = np.linalg.svd(G, compute_uv=False)
        assert g.max_gain == pytest.approx(sv[:, 0].max(), rel=1e-6)
        assert g.min_gain == pytest.approx(sv[:, 1].min(), rel=1e-6)

    def test_scalar_shift_identity(self, rng):
        for _ in range(5):
            num = rng.standard_normal(2)
            den = np.array([rng.uniform(0.5, 2), rng.uniform(0.5, 2), 1.0])
            T = TransferMatrix.scalar(num, den)
            for a in (-2.0, 0.3, 1.7):
                lit = TransferMatrix.scalar(np.pad(num, (0, 1)) - a * den, den)
                grid = make_frequency_grid(T)
                g1, g2 = soft_gains(T, a, grid), soft_gains(lit, 0.0, grid)
                assert g1.max_gain == pytest.approx(g2.max_gain, rel=1e-10, abs=1e-12)
                assert g1.min_gain == pytest.approx(g2.min_gain, rel=1e-10, abs=1e-12)

    def test_delay_does_not_change_scalar_magnitudes(self):
        R = TransferMatrix.scalar([1.0, 0.5], [2.0, 0.4, 1.0])
        Rd = TransferMatrix.scalar([1.0, 0.5], [2.0, 0.4, 1.0], delay=0.7)
        grid = make_frequency_grid(Rd)
        a, b = soft_gains(R, 0.0, grid), soft_gains(Rd, 0.0, grid)
        assert a.max_gain == pytest.approx(b.max_gain, abs=1e-9)
        assert a.min_gain == pytest.approx(b.min_gain, abs=1e-9)

    def test_improper(self):
        T = TransferMatrix.scalar([1.0, 1.0], [1.0])  # 1 + s
        g = soft_gains(T, 0.0)
        assert g.max_gain == math.inf
        assert g.min_gain == pytest.approx(1.0, abs=1e-9)


class TestHardGains:
    @pytest.mark.parametrize("alpha", [-2.0, 0.0, 0.5, 3.0])
    def test_t2_unbounded(self, t2, alpha):
        g = hard_gains(t2, alpha)
        assert g.max_gain == math.inf
        assert g.max_witness.kind == "pole" and abs(g.max_witness.where - 1) < 1e-8

    def test_integrator_min(self, t3):
        g = hard_gains(t3, -1.0)
        assert g.min_gain == pytest.approx(1.0, abs=1e-12)
        # 2-D oracle: |1/s + 1| over a right-half-plane grid
        x = np.geomspace(1e-4, 1e4, 400)
        S = x[:, None] + 1j * np.concatenate([-x[::-1], [0], x])[None, :]
        assert np.min(np.abs(1 / S + 1)) == pytest.approx(1.0, abs=1e-4)
        assert hard_gains(t3, 1.0).min_gain == 0.0

    def test_stable_hard_equals_soft(self, rng):
        for _ in range(10):
            T = random_rational(rng, 2, stable=True)
            for a in (-1.0, 0.0, 2.0):
                assert hard_gains(T, a).max_gain == pytest.approx(soft_gains(T, a).max_gain, rel=1e-6)

    def test_soft_hard_consistency(self, rng):
        """hard max >= soft max and hard min <= soft min on random stable and unstable models."""
        for k in range(100):
            T = random_rational(rng, 1 + k % 2, stable=k % 3 == 0)
            for a in (-1.5, 0.0, 0.8):
                s, h = soft_gains(T, a), hard_gains(T, a)
                assert h.max_gain >= s.max_gain * (1 - 1e-9)
                assert h.min_gain <= s.min_gain * (1 + 1e-9) + 1e-12

    def test_delay_min_is_sampled_bound(self, t1):
        g = hard_gains(t1, 0.5)
        assert "sampled-rhp" in g.flags
        # e^{-s}/(s+1) = 1/2 has a real root in (0, 1): the infimum is 0
        assert g.min_gain < 1e-6
        assert hard_gains(t1, 0.5).min_gain <= soft_gains(t1, 0.5).min_gain

    def test_provider(self, t3):
        p = FrequencyGainProvider(t3, "hard")
        assert p.metadata()["mode"] == "hard"
        with pytest.raises(ValueError):
            FrequencyGainProvider(t3, "medium")


class TestBoundedReal:
    def test_first_order(self):
        S = StateSpace([[-1.0]], [[1.0]], [[1.0]], [[0.0]])
        assert brl_max_gain(BrlQuery(S, 0.0, "soft")) == pytest.approx(1.0, rel=1e-6)
        assert brl_min_gain(BrlQuery(S, 0.0, "soft")) == 0.0

    def test_unstable(self):
        S = StateSpace([[1.0]], [[1.0]], [[1.0]], [[0.0]])
        soft = brl_max_gain(BrlQuery(S, 0.0, "soft"))
        assert soft == pytest.approx(1.0, rel=1e-6)
        assert soft == pytest.approx(soft_gains(S, 0.0).max_gain, rel=1e-6)
        assert brl_max_gain(BrlQuery(S, 0.0, "hard")) == math.inf

    @pytest.mark.parametrize("alpha", [-1.0, 0.0, 2.0])
    @pytest.mark.parametrize("mode", ["soft", "hard"])
    def test_axis_eigenvalue(self, alpha, mode):
        S = StateSpace([[0.0]], [[1.0]], [[1.0]], [[0.0]])
        assert brl_max_gain(BrlQuery(S, alpha, mode)) == math.inf

    def test_min_through_inverse(self):
        S = StateSpace([[-1.0]], [[1.0]], [[1.0]], [[1.0]])  # (s+2)/(s+1)
        assert brl_min_gain(BrlQuery(S, 0.0, "soft")) == pytest.approx(1.0, rel=1e-6)
        lo, _, _, _ = dense_axis_extremes(lambda s: (s + 2) / (s + 1))
        assert brl_min_gain(BrlQuery(S, 0.0, "soft")) == pytest.approx(lo, rel=1e-6)

    def test_t2_hard_min(self, t2):
        S = realize(t2)
        b = brl_min_gain(BrlQuery(S, 0.0, "hard"))
        f = hard_gains(t2, 0.0).min_gain
        assert b == f == 0.0  # det T2 has a right-half-plane root
        for a in (0.7, 2.5):
            assert brl_min_gain(BrlQuery(S, a, "hard")) == pytest.approx(hard_gains(t2, a).min_gain, rel=1e-5, abs=1e-9)

    def test_against_frequency_grid(self, rng):
        for _ in range(8):
            S = random_stable_ss(rng, int(rng.integers(1, 6)), int(rng.integers(1, 4)))
            for a in (-1.0, 0.0, 1.5):
                f = soft_gains(S, a)
                assert brl_max_gain(BrlQuery(S, a)) == pytest.approx(f.max_gain, rel=1e-5)

    def test_inverse_consistency(self, rng):
        S = random_stable_ss(rng, 4, 2)
        for a in (-0.5, 0.4):
            q = BrlQuery(S, a)
            inv = invert(StateSpace(S.A, S.B, S.C, S.D - a * np.eye(2)))
            m = brl_min_gain(q) * brl_max_gain(BrlQuery(inv, 0.0))
            assert m == pytest.approx(1.0, abs=1e-9)

    def test_shift_consistency_exact(self, rng):
        S = random_stable_ss(rng, 3, 2)
        a = 0.37
        pre = StateSpace(S.A, S.B, S.C, S.D - a * np.eye(2))
        assert brl_max_gain(BrlQuery(S, a)) == brl_max_gain(BrlQuery(pre, 0.0))

    def test_hamiltonian_indicator_monotone(self, rng):
        S = random_stable_ss(rng, 4, 2)
        norm = brl_max_gain(BrlQuery(S, 0.0, tolerance=1e-10))
        dn = np.linalg.norm(S.D, 2)
        flags = []
        for g in np.linspace(max(dn, 0.2 * norm) * 1.001, 3 * norm, 60):
            flags.append(_imag_eigs(hamiltonian(S.A, S.B, S.C, S.D, g)).size > 0)
        # once gamma exceeds the norm, no more imaginary eigenvalues
        first_clear = flags.index(False)
        assert not any(flags[first_clear:])

    def test_delay_rejected(self, t1):
        with pytest.raises(DelayNotSupportedError):
            BoundedRealGainProvider(t1)
        with pytest.raises(DelayNotSupportedError):
            BrlQuery(t1, 0.0)

    def test_transfer_matrix_accepted(self, first_order):
        g = BoundedRealGainProvider(first_order).gains(0.0)
        assert g.max_gain == pytest.approx(1.0, rel=1e-6)

    def test_nonminimal_flag(self):
        S = StateSpace(np.diag([-1.0, -2.0]), [[1.0], [0.0]], [[1.0, 1.0]], [[0.5]])
        g = BoundedRealGainProvider(S).gains(0.0)
        assert "non-minimal" in g.flags
