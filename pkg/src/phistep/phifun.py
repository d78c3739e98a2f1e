"""Evaluation of the phi and gamma functions of exponential integrators.

The phi functions are defined by

    phi_0(z) = exp(z),      phi_{l+1}(z) = (phi_l(z) - 1/l!) / z,

with the removable singularity at z = 0 filled by phi_l(0) = 1/l!.  The
scaled variants psi_{l,m}(z) = c_m^l * phi_l(c_m * z) appear as stage
coefficients; both are covered by the PhiTerm/PhiExpr containers below.

The gamma functions drive multistep starting procedures:

    gamma_0(k, z) = (exp(k z) - 1) / z,
    gamma_j(k, z) = ( sum_{m=1..j} ((-1)^(m-1)/m) gamma_{j-m}(k, z)
                      - binom(k, j) ) / z,

where binom(k, j) = 0 once j > k.

Direct evaluation of either family in float64 is unstable for small |z|
(Kassam & Trefethen, SIAM J. Sci. Comput. 26 (2005)), so diagonal operator
arguments go through a unit-circle contour mean instead: the trapezoidal
rule on |s - lambda| = 1 is exact to far below float precision for these
entire functions, and every contour point is handled by a hybrid scalar
kernel (truncated series near 0, closed-form recurrence away from it).
"""
from __future__ import annotations

import math
import threading
from collections import OrderedDict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Sequence, Union

import numpy as np

__all__ = [
    "MAX_INDEX",
    "ContourSpec",
    "PhiTerm",
    "PhiExpr",
    "phi",
    "exp_term",
    "const_term",
    "psi",
    "phi_scalar",
    "phi_contour",
    "gamma_scalar",
    "gamma_contour",
    "eval_phi_expr",
    "clear_eval_cache",
]

# Highest phi/gamma order supported; the scheme catalog never needs more.
MAX_INDEX = 12

_SERIES_TOL = 1e-18
_SERIES_MAX_TERMS = 200

Scalar = Union[int, float, complex, Fraction]


def _series_radius(index: int) -> float:
    # The e^z-seeded recurrence loses roughly eps * e^(Re z) * l! / |z|^l
    # of relative accuracy, so the series must cover |z| up to O(l).
    # 0.7*l keeps both branches at <= ~1e-14 relative error for l <= 12
    # (measured against an 80-digit oracle).
    return max(0.5, 0.7 * index)


# ---------------------------------------------------------------------------
# scalar / vectorized kernels


def _phi_series(index: int, z: np.ndarray) -> np.ndarray:
    """Truncated power series sum_j z^j / (j + index)! on an ndarray."""
    term = np.full(z.shape, 1.0 / math.factorial(index), dtype=np.complex128)
    total = term.copy()
    for j in range(1, _SERIES_MAX_TERMS + 1):
        term = term * z / (index + j)
        total += term
        if np.all(np.abs(term) <= _SERIES_TOL * np.abs(total)):
            break
    return total


def _phi_recurrence(index: int, z: np.ndarray) -> np.ndarray:
    """Upward recurrence from exp(z); stable once |z| is O(index) or larger."""
    p = np.exp(z)
    for l in range(index):
        p = (p - 1.0 / math.factorial(l)) / z
    return p


def _phi_values(index: int, z: np.ndarray) -> np.ndarray:
    """phi_index at every entry of a complex ndarray."""
    if index == 0:
        return np.exp(z)
    out = np.empty(z.shape, dtype=np.complex128)
    near = np.abs(z) < _series_radius(index)
    if near.any():
        out[near] = _phi_series(index, z[near])
    if not near.all():
        out[~near] = _phi_recurrence(index, z[~near])
    return out


def phi_scalar(index: int, z: complex) -> complex:
    """phi_index(z) for a single complex argument."""
    if not 0 <= index <= MAX_INDEX:
        raise ValueError(f"phi index must be in [0, {MAX_INDEX}], got {index}")
    return complex(_phi_values(index, np.asarray([z], dtype=np.complex128))[0])


# gamma values feed starting procedures only (tiny arrays, precompute-time),
# so both gamma kernels run in extended precision where the platform has it;
# x86 long double buys ~3 digits, enough to flatten the mid-|z| zone where
# series cancellation and recurrence amplification overlap for j, k ~ 8.
_LD = np.longdouble if np.finfo(np.longdouble).eps < np.finfo(np.float64).eps else np.float64
_CLD = np.complex256 if _LD is np.longdouble and hasattr(np, "complex256") else np.complex128


def _gamma_series_terms(j: int, k: int) -> int:
    # Coefficients behave like k^(n+1)/(n+1)!; keep terms until the tail at
    # the switch radius is far below the 1e-18 working tolerance.
    x = max(_gamma_series_radius(j, k) * k, 1e-9)
    n = 1
    while n * math.log(x) - math.lgamma(n + 2) > math.log(1e-22):
        n += 1
    return max(n + 8, 24)


@lru_cache(maxsize=None)
def _gamma_series_coeffs(j: int, k: int) -> tuple[float, ...]:
    """Maclaurin coefficients of gamma_j(k, .), exact until the float cast.

    Built by composing the gamma recurrence with the series of
    gamma_0(k, z) = sum_n k^(n+1) z^n / (n+1)! in Fraction arithmetic; the
    constant term of each recurrence numerator must cancel binom(k, j)
    exactly, which doubles as a consistency check on the recurrence.
    """
    nterms = _gamma_series_terms(j, k)
    rows: list[list[Fraction]] = [
        [Fraction(k) ** (n + 1) / math.factorial(n + 1) for n in range(nterms + 1)]
    ]
    for jj in range(1, j + 1):
        numer = [Fraction(0)] * (nterms + 1)
        for m in range(1, jj + 1):
            w = Fraction((-1) ** (m - 1), m)
            prev = rows[jj - m]
            for n in range(nterms + 1):
                numer[n] += w * prev[n]
        numer[0] -= math.comb(k, jj)
        if numer[0] != 0:
            raise AssertionError("gamma recurrence lost its removable singularity")
        rows.append(numer[1:] + [Fraction(0)])
    # hi/lo double pairs: summing both in long double recovers the exact
    # rational coefficient to ~1e-35 without int -> longdouble pitfalls
    out = []
    for c in rows[j]:
        hi = float(c)
        out.append((hi, float(c - Fraction(hi))))
    return tuple(out)


def _gamma_series(j: int, k: int, z: np.ndarray) -> np.ndarray:
    coeffs = _gamma_series_coeffs(j, k)
    zl = z.astype(_CLD)
    out = np.zeros(z.shape, dtype=_CLD)
    for hi, lo in reversed(coeffs):
        out = out * zl + (_LD(hi) + _LD(lo))
    return out.astype(np.complex128)


def _gamma_recurrence(j: int, k: int, z: np.ndarray) -> np.ndarray:
    zl = z.astype(_CLD)
    rows = [(np.exp(k * zl) - _LD(1)) / zl]
    for jj in range(1, j + 1):
        acc = np.zeros(z.shape, dtype=_CLD)
        for m in range(1, jj + 1):
            acc += (_LD((-1) ** (m - 1)) / _LD(m)) * rows[jj - m]
        acc -= _LD(math.comb(k, jj))
        rows.append(acc / zl)
    return rows[j].astype(np.complex128)


def _gamma_series_radius(j: int, k: int) -> float:
    # The series is conditioned like e^(k|z|) (coefficients ~ k^n/n!), the
    # recurrence like |z|^(-j); the switch balances the two.  Calibrated
    # against an 80-digit oracle for j, k <= 8.
    return max(0.5, min(0.7 * max(j, 1), 7.0 / max(k, 1)))


def _gamma_values(j: int, k: int, z: np.ndarray) -> np.ndarray:
    out = np.empty(z.shape, dtype=np.complex128)
    near = np.abs(z) < _gamma_series_radius(j, k)
    if near.any():
        out[near] = _gamma_series(j, k, z[near])
    if not near.all():
        out[~near] = _gamma_recurrence(j, k, z[~near])
    return out


def gamma_scalar(j: int, k: int, z: complex) -> complex:
    """gamma_j(k, z) for a single complex argument."""
    if not 0 <= j <= MAX_INDEX:
        raise ValueError(f"gamma index must be in [0, {MAX_INDEX}], got {j}")
    if not 1 <= k <= MAX_INDEX:
        raise ValueError(f"gamma step multiplier must be in [1, {MAX_INDEX}], got {k}")
    return complex(_gamma_values(j, k, np.asarray([z], dtype=np.complex128))[0])


# ---------------------------------------------------------------------------
# contour means


@dataclass(frozen=True)
class ContourSpec:
    """Unit-circle trapezoidal rule used to evaluate phi/gamma at diagonals.

    points: number of quadrature nodes M (64 is ample in 1D, 32 in 2D/3D;
        the rule's aliasing error for these entire functions is far below
        float precision either way).
    radius: contour radius around each diagonal entry, fixed at 1.0.
    real_symmetry: evaluate real entries on the upper half circle only and
        keep the real part of the mean, so real operators get coefficients
        with exactly zero imaginary part.
    """

    points: int = 64
    radius: float = 1.0
    real_symmetry: bool = True

    def __post_init__(self) -> None:
        if self.points < 4:
            raise ValueError(f"contour needs at least 4 points, got {self.points}")
        if not self.radius > 0:
            raise ValueError(f"contour radius must be positive, got {self.radius}")


def _contour_mean(values_fn, lam: np.ndarray, contour: ContourSpec) -> np.ndarray:
    """Mean of values_fn over unit-circle contours centred at each entry.

    Real entries use M nodes on the upper half circle and the real part of
    the mean (the conjugate-symmetric lower half is implied), complex
    entries the full circle.
    """
    lam = np.ascontiguousarray(lam, dtype=np.complex128)
    out = np.empty(lam.shape, dtype=np.complex128)
    real_mask = (lam.imag == 0.0) if contour.real_symmetry else np.zeros(lam.shape, bool)
    M = contour.points
    if real_mask.any():
        centers = lam[real_mask]
        nodes = contour.radius * np.exp(1j * np.pi * (np.arange(M) + 0.5) / M)
        acc = np.zeros(centers.shape, dtype=np.float64)
        for node in nodes:
            acc += values_fn(centers + node).real
        out[real_mask] = acc / M
    if not real_mask.all():
        centers = lam[~real_mask]
        nodes = contour.radius * np.exp(2j * np.pi * (np.arange(M) + 0.5) / M)
        acc = np.zeros(centers.shape, dtype=np.complex128)
        for node in nodes:
            acc += values_fn(centers + node)
        out[~real_mask] = acc / M
    return out


def _dedup_eval(fn, lam: np.ndarray) -> np.ndarray:
    """Evaluate fn on the unique entries of lam and scatter back.

    Operator diagonals repeat heavily (a 2D Laplacian has O(N) distinct
    values on an N^2 grid), so this turns precompute from minutes into
    milliseconds without changing a single bit of the result.
    """
    flat = np.asarray(lam, dtype=np.complex128).ravel()
    if flat.size > 512:
        uniq, inverse = np.unique(flat, return_inverse=True)
        if uniq.size < flat.size // 2:
            return fn(uniq)[inverse].reshape(np.shape(lam))
    return fn(flat).reshape(np.shape(lam))


def phi_contour(index: int, lam, contour: ContourSpec = ContourSpec()):
    """phi_index at a scalar or ndarray of diagonal entries via contour mean."""
    if not 0 <= index <= MAX_INDEX:
        raise ValueError(f"phi index must be in [0, {MAX_INDEX}], got {index}")
    arr = np.asarray(lam, dtype=np.complex128)
    out = _dedup_eval(
        lambda u: _contour_mean(lambda z: _phi_values(index, z), u, contour), arr
    )
    return complex(out[()]) if np.isscalar(lam) or arr.shape == () else out


def gamma_contour(j: int, k: int, lam, contour: ContourSpec = ContourSpec()):
    """gamma_j(k, .) at a scalar or ndarray of diagonal entries via contour mean."""
    if not 0 <= j <= MAX_INDEX:
        raise ValueError(f"gamma index must be in [0, {MAX_INDEX}], got {j}")
    if not 1 <= k <= MAX_INDEX:
        raise ValueError(f"gamma step multiplier must be in [1, {MAX_INDEX}], got {k}")
    arr = np.asarray(lam, dtype=np.complex128)
    out = _dedup_eval(
        lambda u: _contour_mean(lambda z: _gamma_values(j, k, z), u, contour), arr
    )
    return complex(out[()]) if np.isscalar(lam) or arr.shape == () else out


# ---------------------------------------------------------------------------
# symbolic linear combinations of phi terms


def _check_scalar(value, what: str):
    v = complex(value)
    if not (math.isfinite(v.real) and math.isfinite(v.imag)):
        raise ValueError(f"{what} must be finite, got {value!r}")


@dataclass(frozen=True)
class PhiTerm:
    """One term coeff * phi_index(scale * z).

    index = 0 encodes an exponential coeff * exp(scale * z); the single
    degenerate combination index = 0, scale = 0 is the canonical constant
    term (needed by integrating-factor tableaux whose entries include plain
    rationals).  Exact Fraction coefficients survive untouched so tableau
    identities hold in rational arithmetic.
    """

    coeff: Scalar
    index: int
    scale: Scalar = 1

    def __post_init__(self) -> None:
        if not isinstance(self.index, int) or not 0 <= self.index <= MAX_INDEX:
            raise ValueError(f"phi index must be an int in [0, {MAX_INDEX}], got {self.index!r}")
        _check_scalar(self.coeff, "coeff")
        if isinstance(self.scale, complex):
            raise ValueError("scale must be real")
        _check_scalar(self.scale, "scale")
        if self.scale == 0 and self.index != 0:
            raise ValueError("scale 0 is only allowed for the constant term (index 0)")

    def _key(self):
        # Fraction(1, 2) and 0.5 hash/compare equal, so mixed exact/float
        # scales merge correctly.
        return (self.index, self.scale)


def _as_exact(value):
    """Keep ints as Fractions so symbolic identities stay exact."""
    if isinstance(value, bool):
        raise TypeError("bool is not a coefficient")
    if isinstance(value, int):
        return Fraction(value)
    return value


class PhiExpr:
    """Finite linear combination of PhiTerms, closed under +, - and scaling."""

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[PhiTerm] = ()):
        merged: OrderedDict = OrderedDict()
        for t in terms:
            if not isinstance(t, PhiTerm):
                raise TypeError(f"expected PhiTerm, got {type(t).__name__}")
            key = t._key()
            if key in merged:
                merged[key] = PhiTerm(_add_coeff(merged[key].coeff, t.coeff), t.index, t.scale)
            else:
                merged[key] = PhiTerm(_as_exact(t.coeff), t.index, t.scale)
        self.terms: tuple[PhiTerm, ...] = tuple(
            sorted(
                (t for t in merged.values() if t.coeff != 0),
                key=lambda t: (t.index, float(t.scale)),
            )
        )

    def __add__(self, other: "PhiExpr") -> "PhiExpr":
        if not isinstance(other, PhiExpr):
            return NotImplemented
        return PhiExpr(self.terms + other.terms)

    def __sub__(self, other: "PhiExpr") -> "PhiExpr":
        if not isinstance(other, PhiExpr):
            return NotImplemented
        return self + (-other)

    def __neg__(self) -> "PhiExpr":
        return self * -1

    def __mul__(self, factor) -> "PhiExpr":
        factor = _as_exact(factor)
        return PhiExpr(PhiTerm(t.coeff * factor, t.index, t.scale) for t in self.terms)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, PhiExpr) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(self.fingerprint())

    def is_zero(self) -> bool:
        return not self.terms

    def at_zero(self) -> Fraction:
        """Exact value at z = 0 (phi_l(0) = 1/l!); requires rational coeffs."""
        total = Fraction(0)
        for t in self.terms:
            if not isinstance(t.coeff, Rational):
                raise ValueError(f"at_zero needs rational coefficients, got {t.coeff!r}")
            total += Fraction(t.coeff) / math.factorial(t.index)
        return total

    def scale_argument(self, factor) -> "PhiExpr":
        """Substitute z -> factor * z."""
        factor = _as_exact(factor)
        return PhiExpr(PhiTerm(t.coeff, t.index, t.scale * factor) for t in self.terms)

    def fingerprint(self) -> tuple:
        """Evaluation identity: terms reduced to plain floats/complex."""
        return tuple((t.index, float(t.scale), complex(t.coeff)) for t in self.terms)

    def __repr__(self) -> str:
        if not self.terms:
            return "PhiExpr(0)"
        bits = []
        for t in self.terms:
            if t.index == 0 and t.scale == 0:
                bits.append(f"{t.coeff}")
            elif t.index == 0:
                bits.append(f"{t.coeff}*exp({t.scale}*z)")
            else:
                bits.append(f"{t.coeff}*phi{t.index}({t.scale}*z)")
        return "PhiExpr(" + " + ".join(bits) + ")"


def _add_coeff(a, b):
    a, b = _as_exact(a), _as_exact(b)
    if isinstance(a, Rational) and isinstance(b, Rational):
        return Fraction(a) + Fraction(b)
    return complex(a) + complex(b) if (isinstance(a, complex) or isinstance(b, complex)) else a + b


def phi(index: int, coeff: Scalar = 1, scale: Scalar = 1) -> PhiExpr:
    """coeff * phi_index(scale * z) as a one-term expression."""
    return PhiExpr([PhiTerm(coeff, index, scale)])


def exp_term(coeff: Scalar = 1, scale: Scalar = 1) -> PhiExpr:
    """coeff * exp(scale * z) as a one-term expression."""
    return PhiExpr([PhiTerm(coeff, 0, scale)])


def const_term(value: Scalar) -> PhiExpr:
    """A plain constant as a one-term expression."""
    return PhiExpr([PhiTerm(value, 0, 0)])


def psi(index: int, node: Scalar) -> PhiExpr:
    """psi_{index,node} = node^index * phi_index(node * z), the stage-scaled phi."""
    node = _as_exact(node)
    if node == 0:
        return PhiExpr()
    return phi(index, node**index, node)


# ---------------------------------------------------------------------------
# cached evaluation over operator diagonals

_EVAL_CACHE: OrderedDict = OrderedDict()
_EVAL_CACHE_MAX = 256
_EVAL_LOCK = threading.Lock()


def clear_eval_cache() -> None:
    with _EVAL_LOCK:
        _EVAL_CACHE.clear()


def _diag_fingerprint(diag: np.ndarray) -> bytes:
    return diag.shape.__repr__().encode() + diag.tobytes()


def _cache_get(key):
    with _EVAL_LOCK:
        if key in _EVAL_CACHE:
            _EVAL_CACHE.move_to_end(key)
            return _EVAL_CACHE[key]
    return None


def _cache_put(key, value: np.ndarray) -> None:
    value.setflags(write=False)
    with _EVAL_LOCK:
        _EVAL_CACHE[key] = value
        while len(_EVAL_CACHE) > _EVAL_CACHE_MAX:
            _EVAL_CACHE.popitem(last=False)


def eval_phi_expr(expr: PhiExpr, diag, contour: ContourSpec = ContourSpec()) -> np.ndarray:
    """Evaluate a PhiExpr entrywise over an operator diagonal.

    Returns a read-only complex array shaped like diag; entries with zero
    imaginary part go through the real-symmetry contour, so a real diagonal
    yields values whose imaginary parts are exactly zero.  Results are
    cached on (expression, diagonal bytes, contour), and the underlying
    phi_index(scale * diag) arrays are cached separately so expressions
    sharing terms (every tableau does) are evaluated once.
    """
    if not isinstance(expr, PhiExpr):
        raise TypeError(f"expected PhiExpr, got {type(expr).__name__}")
    diag_arr = np.ascontiguousarray(diag, dtype=np.complex128)
    diag_fp = _diag_fingerprint(diag_arr)
    key = ("expr", expr.fingerprint(), diag_fp, contour)
    hit = _cache_get(key)
    if hit is not None:
        return hit
    out = np.zeros(diag_arr.shape, dtype=np.complex128)
    for t in expr.terms:
        if t.index == 0 and t.scale == 0:
            out += complex(t.coeff)
            continue
        tkey = ("phi", t.index, float(t.scale), diag_fp, contour)
        vals = _cache_get(tkey)
        if vals is None:
            vals = phi_contour(t.index, float(t.scale) * diag_arr, contour)
            vals = np.asarray(vals, dtype=np.complex128)
            _cache_put(tkey, vals)
        out += complex(t.coeff) * vals
    _cache_put(key, out)
    return out
