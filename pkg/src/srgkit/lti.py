"""LTI operator models: rational-times-delay transfer matrices and state-space quadruples.

Polynomial coefficients are stored in ascending degree throughout, matching
:mod:`numpy.polynomial.polynomial`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import numpy.polynomial.polynomial as P

__all__ = [
    "ModelError",
    "PoleEvaluationError",
    "NoInverseError",
    "DelayNotSupportedError",
    "RationalDelayEntry",
    "TransferMatrix",
    "StateSpace",
    "MatrixModel",
    "AlphaShift",
    "shift",
    "invert",
    "realize",
    "minimal_realization",
    "classify_poles",
    "tol_axis",
    "load_model",
    "save_model",
    "model_from_dict",
    "model_to_dict",
]


class ModelError(ValueError):
    """Malformed model description."""


class PoleEvaluationError(ArithmeticError):
    """Evaluation requested at (or numerically at) a pole."""

    def __init__(self, pole: complex, msg: str | None = None):
        self.pole = pole
        super().__init__(msg or f"evaluation at pole {pole!r}")


class NoInverseError(ArithmeticError):
    """Feedthrough matrix is singular, so no proper inverse exists."""


class DelayNotSupportedError(TypeError):
    """A delayed entry was passed to a delay-free (state-space) routine."""


def _trim(c) -> np.ndarray:
    c = np.atleast_1d(np.asarray(c, dtype=float))
    nz = np.flatnonzero(c)
    if nz.size == 0:
        return np.zeros(1)
    return c[: nz[-1] + 1]


def tol_axis(scale: float) -> float:
    """Tolerance for calling a pole purely imaginary."""
    return 1e-8 * max(1.0, scale)


def classify_poles(poles, scale: float | None = None) -> dict[str, list[complex]]:
    poles = [complex(p) for p in poles]
    if scale is None:
        scale = max([abs(p) for p in poles], default=1.0)
    tol = tol_axis(scale)
    out = {"stable": [], "axis": [], "rhp": []}
    for p in poles:
        if abs(p.real) <= tol:
            out["axis"].append(p)
        elif p.real > 0:
            out["rhp"].append(p)
        else:
            out["stable"].append(p)
    return out


def _cancel(num_roots: np.ndarray, den_roots: np.ndarray, rtol: float = 1e-6) -> np.ndarray:
    """Denominator roots left after cancelling those matched by numerator roots."""
    left = list(den_roots)
    for z in num_roots:
        if not left:
            break
        d = [abs(z - p) for p in left]
        k = int(np.argmin(d))
        if d[k] <= rtol * max(1.0, abs(z)):
            left.pop(k)
    return np.array(left, dtype=complex)


@dataclass(frozen=True)
class RationalDelayEntry:
    """Scalar symbol ``num(s)/den(s) * exp(-delay*s)`` with ascending coefficients."""

    num: tuple
    den: tuple
    delay: float = 0.0

    def __post_init__(self):
        den = _trim(self.den)
        if not np.any(den):
            raise ModelError("denominator is identically zero")
        if not (np.all(np.isfinite(den)) and np.all(np.isfinite(_trim(self.num)))):
            raise ModelError("non-finite coefficient")
        if not (self.delay >= 0 and math.isfinite(self.delay)):
            raise ModelError(f"delay must be finite and >= 0, got {self.delay}")

    @property
    def normalized(self) -> tuple[np.ndarray, np.ndarray]:
        """Numerator and monic denominator."""
        den = _trim(self.den)
        lead = den[-1]
        return _trim(self.num) / lead, den / lead

    @property
    def is_proper(self) -> bool:
        num, den = self.normalized
        return not np.any(num) or len(num) <= len(den)

    @property
    def relative_degree(self) -> int:
        num, den = self.normalized
        if not np.any(num):
            return len(den)
        return len(den) - len(num)

    def poles(self, reduce: bool = True) -> np.ndarray:
        num, den = self.normalized
        pr = P.polyroots(den) if len(den) > 1 else np.zeros(0)
        if reduce and np.any(num) and len(num) > 1:
            pr = _cancel(P.polyroots(num), pr)
        return np.asarray(pr, dtype=complex)

    def zeros(self) -> np.ndarray:
        num, _ = self.normalized
        return np.asarray(P.polyroots(num), dtype=complex) if len(num) > 1 else np.zeros(0, complex)

    def __call__(self, s):
        num, den = self.normalized
        s = np.asarray(s, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = P.polyval(s, num) / P.polyval(s, den)
        if self.delay:
            val = val * np.exp(-self.delay * s)
        return val

    def limit_at_infinity(self) -> complex:
        """Limit of the rational part as ``|s| -> inf`` (``inf`` when improper)."""
        num, den = self.normalized
        if not np.any(num):
            return 0.0
        if len(num) > len(den):
            return complex(math.inf)
        if len(num) < len(den):
            return 0.0
        return complex(num[-1])


def _as_entry(e) -> RationalDelayEntry:
    if isinstance(e, RationalDelayEntry):
        return e
    if np.isscalar(e):
        return RationalDelayEntry((float(e),), (1.0,))
    raise ModelError(f"cannot interpret {e!r} as a transfer-matrix entry")


def _spectral_scale(values) -> float:
    vals = [abs(v) for v in values if np.isfinite(v)]
    return max([1.0] + vals)


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """Square matrix of :class:`RationalDelayEntry` symbols."""

    entries: tuple

    def __post_init__(self):
        rows = tuple(tuple(_as_entry(e) for e in row) for row in self.entries)
        if not rows or any(len(r) != len(rows) for r in rows):
            raise ModelError("transfer matrix must be square and non-empty")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def scalar(cls, num, den, delay: float = 0.0) -> "TransferMatrix":
        return cls(((RationalDelayEntry(tuple(num), tuple(den), delay),),))

    @property
    def m(self) -> int:
        return len(self.entries)

    @property
    def has_delay(self) -> bool:
        return any(e.delay > 0 for row in self.entries for e in row)

    @property
    def min_delay(self) -> float:
        d = [e.delay for row in self.entries for e in row if e.delay > 0]
        return min(d) if d else 0.0

    @property
    def is_proper(self) -> bool:
        return all(e.is_proper for row in self.entries for e in row)

    def eval_many(self, s) -> np.ndarray:
        """Values at the points ``s`` (shape ``(k,)``) as an array ``(k, m, m)``; poles give inf/nan."""
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        out = np.empty((s.size, self.m, self.m), dtype=complex)
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                out[:, i, j] = e(s)
        return out

    def eval(self, s: complex) -> np.ndarray:
        s = complex(s)
        if math.isinf(abs(s)):
            val, _ = self.eval_at_infinity()
            return val
        for p in self.poles():
            if abs(s - p) <= 1e-10 * max(1.0, abs(p)):
                raise PoleEvaluationError(p)
        return self.eval_many([s])[0]

    def eval_at_infinity(self) -> tuple[np.ndarray, bool]:
        """Limit of the rational parts at infinity.

        The flag is True when some delayed entry has a nonzero limit, in which
        case the true limit does not exist (a modulus-1 factor keeps rotating).
        """
        val = np.empty((self.m, self.m), dtype=complex)
        osc = False
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                val[i, j] = e.limit_at_infinity()
                if e.delay > 0 and val[i, j] != 0:
                    osc = True
        return val, osc

    def poles(self) -> np.ndarray:
        """Pole locations: union of the reduced entry poles (with multiplicity per entry)."""
        ps = [e.poles() for row in self.entries for e in row]
        return np.concatenate(ps) if ps else np.zeros(0, complex)

    def spectral_scale(self) -> float:
        vals = list(self.poles())
        for row in self.entries:
            for e in row:
                vals.extend(e.zeros())
        return _spectral_scale(vals)

    def pole_classes(self) -> dict[str, list[complex]]:
        return classify_poles(self.poles(), _spectral_scale(self.poles()))


@dataclass(eq=False)
class StateSpace:
    """Quadruple ``(A, B, C, D)`` with ``T(s) = C (sI - A)^{-1} B + D``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        m = D.shape[0]
        A = np.asarray(self.A, dtype=float)
        A = np.atleast_2d(A) if A.size else np.zeros((0, 0))
        n = A.shape[0]
        try:
            B = np.asarray(self.B, dtype=float).reshape(n, m)
            C = np.asarray(self.C, dtype=float).reshape(m, n)
        except ValueError as exc:
            raise ModelError(f"inconsistent dimensions: {exc}") from exc
        if D.shape != (m, m) or A.shape != (n, n):
            raise ModelError(f"inconsistent dimensions A{A.shape} D{D.shape}")
        for name, M in zip("ABCD", (A, B, C, D)):
            if not np.all(np.isfinite(M)):
                raise ModelError(f"non-finite entry in {name}")
        self.A, self.B, self.C, self.D = A, B, C, D
        self.warnings = [w for w in self.warnings if "not " not in w]
        if n:
            nc = _reachable_dim(A, B)
            no = _reachable_dim(A.T, C.T)
            if nc < n:
                self.warnings.append(f"(A,B) not controllable: rank {nc} < {n}")
            if no < n:
                self.warnings.append(f"(A,C) not observable: rank {no} < {n}")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.D.shape[0]

    @property
    def is_minimal(self) -> bool:
        return not any("not " in w for w in self.warnings)

    has_delay = False
    min_delay = 0.0
    is_proper = True

    def eval_many(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        out = np.broadcast_to(self.D.astype(complex), (s.size, self.m, self.m)).copy()
        if self.n == 0:
            return out
        # diagonalise once when possible, otherwise solve per point
        w, V = np.linalg.eig(self.A)
        if np.linalg.cond(V) < 1e8:
            CV = self.C @ V
            ViB = np.linalg.solve(V, self.B)
            with np.errstate(divide="ignore", invalid="ignore"):
                R = 1.0 / (s[:, None] - w[None, :])
            out += np.einsum("ik,sk,kj->sij", CV, R, ViB)
            return out
        eye = np.eye(self.n)
        for k, sk in enumerate(s):
            try:
                out[k] += self.C @ np.linalg.solve(sk * eye - self.A, self.B)
            except np.linalg.LinAlgError:
                out[k] = np.nan
        return out

    def eval(self, s: complex) -> np.ndarray:
        s = complex(s)
        if math.isinf(abs(s)):
            return self.D.astype(complex)
        for p in self.poles():
            if abs(s - p) <= 1e-10 * max(1.0, abs(p)):
                raise PoleEvaluationError(p)
        x = np.linalg.solve(s * np.eye(self.n) - self.A, self.B) if self.n else np.zeros((0, self.m))
        return self.C @ x + self.D

    def eval_at_infinity(self) -> tuple[np.ndarray, bool]:
        return self.D.astype(complex), False

    def poles(self) -> np.ndarray:
        return np.linalg.eigvals(self.A) if self.n else np.zeros(0, complex)

    def norm_a(self) -> float:
        return float(np.linalg.norm(self.A, 2)) if self.n else 0.0

    def pole_classes(self) -> dict[str, list[complex]]:
        return classify_poles(self.poles(), max(1.0, self.norm_a()))

    def spectral_scale(self) -> float:
        vals = list(self.poles())
        try:
            vals.extend(np.linalg.eigvals(invert(self).A))
        except NoInverseError:
            pass
        return _spectral_scale(vals)


@dataclass(frozen=True, eq=False)
class MatrixModel:
    """Constant complex matrix operator."""

    M: np.ndarray

    def __post_init__(self):
        M = np.atleast_2d(np.asarray(self.M, dtype=complex))
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ModelError("matrix operator must be square")
        if not np.all(np.isfinite(M)):
            raise ModelError("matrix operator has non-finite entries")
        object.__setattr__(self, "M", M)

    @property
    def m(self) -> int:
        return self.M.shape[0]


@dataclass(frozen=True, eq=False)
class AlphaShift:
    """The model ``base - alpha*I`` without touching the base."""

    base: object
    alpha: float

    @property
    def m(self) -> int:
        return self.base.m

    def eval(self, s) -> np.ndarray:
        return self.base.eval(s) - self.alpha * np.eye(self.m)

    def eval_many(self, s) -> np.ndarray:
        return self.base.eval_many(s) - self.alpha * np.eye(self.m)

    def eval_at_infinity(self):
        val, osc = self.base.eval_at_infinity()
        return val - self.alpha * np.eye(self.m), osc

    def poles(self) -> np.ndarray:
        return self.base.poles()

    def as_state_space(self) -> StateSpace:
        ss = self.base if isinstance(self.base, StateSpace) else realize(self.base)
        return StateSpace(ss.A, ss.B, ss.C, ss.D - self.alpha * np.eye(ss.m), list(ss.warnings))

    def __getattr__(self, name):
        # delay/properness metadata is unaffected by the shift
        if name in ("has_delay", "min_delay", "is_proper", "spectral_scale", "pole_classes", "norm_a"):
            return getattr(self.base, name)
        raise AttributeError(name)


def shift(T, alpha: float) -> AlphaShift | StateSpace:
    """``T - alpha*I``; state-space models get ``D - alpha*I`` directly."""
    if isinstance(T, StateSpace):
        return StateSpace(T.A, T.B, T.C, T.D - alpha * np.eye(T.m), list(T.warnings))
    if isinstance(T, AlphaShift):
        return AlphaShift(T.base, T.alpha + alpha)
    return AlphaShift(T, float(alpha))


def invert(S: StateSpace) -> StateSpace:
    """Realization of ``T(s)^{-1}``.

    Raises :class:`NoInverseError` when ``D`` is singular to working precision
    (the minimum gain is then zero).
    """
    sv = np.linalg.svd(S.D, compute_uv=False)
    if sv[-1] <= 1e-10 * (1.0 + sv[0]):
        raise NoInverseError(f"sigma_min(D) = {sv[-1]:.3e}")
    Di = np.linalg.inv(S.D)
    return StateSpace(S.A - S.B @ Di @ S.C, S.B @ Di, -Di @ S.C, Di, list(S.warnings))


def _reachable_basis(A: np.ndarray, B: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of the reachable subspace via a block Krylov staircase."""
    n = A.shape[0]
    scale = max(1.0, np.linalg.norm(A, 2), np.linalg.norm(B, 2)) if n else 1.0
    V = np.zeros((n, 0))
    W = B.copy()
    for _ in range(n):
        for _ in range(2):
            W = W - V @ (V.T @ W)
        if W.size == 0:
            break
        U, s, _ = np.linalg.svd(W, full_matrices=False)
        r = int(np.sum(s > rtol * scale))
        if r == 0:
            break
        V = np.hstack([V, U[:, :r]])
        if V.shape[1] >= n:
            break
        W = A @ U[:, :r]
    return V


def _reachable_dim(A, B) -> int:
    return _reachable_basis(np.asarray(A, float), np.asarray(B, float)).shape[1]


def minimal_realization(S: StateSpace) -> StateSpace:
    """Remove uncontrollable, then unobservable, states by orthogonal projection."""
    V = _reachable_basis(S.A, S.B)
    A, B, C = V.T @ S.A @ V, V.T @ S.B, S.C @ V
    W = _reachable_basis(A.T, C.T)
    A, B, C = W.T @ A @ W, W.T @ B, C @ W
    return StateSpace(A, B, C, S.D.copy())


def _entry_realization(e: RationalDelayEntry):
    if e.delay > 0:
        raise DelayNotSupportedError("delayed entries have no finite state-space realization")
    if not e.is_proper:
        raise ModelError("improper entry cannot be realized in state space")
    num, den = e.normalized
    n = len(den) - 1
    num = np.concatenate([num, np.zeros(n + 1 - len(num))])
    d = num[n]
    rem = num[:n] - d * den[:n]
    A = np.zeros((n, n))
    if n:
        A[:-1, 1:] = np.eye(n - 1)
        A[-1, :] = -den[:n]
    B = np.zeros((n, 1))
    if n:
        B[-1, 0] = 1.0
    C = rem.reshape(1, n)
    return A, B, C, d


def realize(T: TransferMatrix, minimal: bool = True) -> StateSpace:
    """State-space realization of a delay-free proper transfer matrix.

    Each entry gets a controllable companion block; the block-diagonal result
    is then reduced to a minimal realization unless ``minimal`` is False.
    """
    if isinstance(T, StateSpace):
        return T
    m = T.m
    blocks = []
    D = np.zeros((m, m))
    for i, row in enumerate(T.entries):
        for j, e in enumerate(row):
            A, B, C, d = _entry_realization(e)
            D[i, j] = d
            if A.shape[0]:
                blocks.append((i, j, A, B, C))
    n = sum(b[2].shape[0] for b in blocks)
    A = np.zeros((n, n))
    B = np.zeros((n, m))
    C = np.zeros((m, n))
    k = 0
    for i, j, Ai, Bi, Ci in blocks:
        ni = Ai.shape[0]
        A[k:k + ni, k:k + ni] = Ai
        B[k:k + ni, j] = Bi[:, 0]
        C[i, k:k + ni] = Ci[0]
        k += ni
    S = StateSpace(A, B, C, D)
    return minimal_realization(S) if minimal else S


# --- model files ----------------------------------------------------------------------


def _num_list(x, what) -> list:
    if not isinstance(x, list) or not x or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
        raise ModelError(f"{what} must be a non-empty list of numbers")
    return x


def _matrix(x, what) -> list:
    if not isinstance(x, list) or not all(isinstance(r, list) for r in x):
        raise ModelError(f"{what} must be a list of rows")
    for r in x:
        if r:
            _num_list(r, what)
    return x


def model_from_dict(d: dict):
    """Build a model from its JSON-compatible description.

    The parsed description is kept on the result as ``_source`` so that
    saving reproduces it exactly.
    """
    if not isinstance(d, dict) or "type" not in d:
        raise ModelError("model description needs a 'type' field")
    kind = d["type"]
    try:
        if kind == "tf":
            rows = d["entries"]
            m = d.get("m", len(rows))
            if not isinstance(rows, list) or len(rows) != m:
                raise ModelError("'entries' must have m rows")
            ents = []
            for row in rows:
                if not isinstance(row, list) or len(row) != m:
                    raise ModelError("each row of 'entries' must have m entries")
                ents.append(tuple(
                    RationalDelayEntry(tuple(_num_list(e["num"], "num")), tuple(_num_list(e["den"], "den")),
                                       float(e.get("delay", 0.0)))
                    for e in row))
            model = TransferMatrix(tuple(ents))
        elif kind == "ss":
            D = _matrix(d["D"], "D")
            m = len(D)
            A = _matrix(d.get("A", []), "A")
            n = len(A)
            B = _matrix(d.get("B", []), "B") if n else []
            C = _matrix(d.get("C", []), "C") if n else []
            model = StateSpace(np.array(A, float).reshape(n, n), np.array(B, float).reshape(n, m),
                               np.array(C, float).reshape(m, n), np.array(D, float))
        elif kind == "matrix":
            M = np.array(_matrix(d["M"], "M"), dtype=complex)
            if "M_imag" in d:
                M = M + 1j * np.array(_matrix(d["M_imag"], "M_imag"), dtype=float)
            model = MatrixModel(M)
        else:
            raise ModelError(f"unknown model type {kind!r}")
    except (KeyError, TypeError) as exc:
        raise ModelError(f"malformed {kind} model: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, ModelError):
            raise
        raise ModelError(str(exc)) from exc
    object.__setattr__(model, "_source", d)
    return model


def _plain(x: float):
    x = float(x)
    return int(x) if x.is_integer() and abs(x) < 2**53 else x


def model_to_dict(model) -> dict:
    src = getattr(model, "_source", None)
    if src is not None:
        return src
    if isinstance(model, TransferMatrix):
        return {"type": "tf", "m": model.m, "entries": [
            [{"num": [_plain(v) for v in e.num], "den": [_plain(v) for v in e.den], "delay": float(e.delay)}
             for e in row] for row in model.entries]}
    if isinstance(model, StateSpace):
        return {"type": "ss", **{k: getattr(model, k).tolist() for k in "ABCD"}}
    if isinstance(model, MatrixModel):
        out = {"type": "matrix", "M": model.M.real.tolist()}
        if np.any(model.M.imag):
            out["M_imag"] = model.M.imag.tolist()
        return out
    raise TypeError(f"cannot serialise {type(model).__name__}")


def dumps_model(model) -> str:
    return json.dumps(model_to_dict(model), indent=2) + "\n"


def load_model(path) -> TransferMatrix | StateSpace | MatrixModel:
    try:
        text = Path(path).read_text(encoding="utf-8")
        d = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelError(f"cannot read model {path}: {exc}") from exc
    return model_from_dict(d)


def save_model(model, path) -> None:
    Path(path).write_text(dumps_model(model), encoding="utf-8")
