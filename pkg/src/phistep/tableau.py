"""Exponential general linear method tableaux and the scheme catalog.

A scheme with s stages and q steps advances coefficients u^n via

    v^1 = u^n,
    v^i = e^{C_i h L} u^n + h sum_{j<i} A_ij(hL) N(v^j)
                          + h sum_{j=1}^{q-1} U_ij(hL) N(u^{n-j}),
    u^{n+1} = e^{h L} u^n + h sum_i B_i(hL) N(v^i)
                          + h sum_{j=1}^{q-1} V_j(hL) N(u^{n-j}),

with every coefficient a finite combination of phi/exp terms (PhiExpr).
Consistency pins the first column of each row through the summation
property

    B_1 = phi_1 - sum_{i>=2} B_i - sum_j V_j,
    A_i1 = psi_{1,i} - sum_{j>=2} A_ij - sum_j U_ij,

which integrating-factor (Lawson-type) schemes deliberately violate.

The catalog covers ETD Runge-Kutta schemes (Cox & Matthews, J. Comput.
Phys. 176 (2002); Krogstad, J. Comput. Phys. 203 (2005)), ETD
Adams-Bashforth schemes (Norsett, Lecture Notes in Math. 109 (1969)),
ETD predictor-corrector combinations of those, and Lawson's integrating
factor methods (Lawson, SIAM J. Numer. Anal. 4 (1967)).  All rational
coefficients are kept exact until evaluation, so each tableau reduces to
its classical counterpart at z = 0 in exact arithmetic.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .errors import TableauFileError
from .phifun import PhiExpr, const_term, exp_term, phi, psi

__all__ = [
    "Tableau",
    "complete_summation",
    "summation_residuals",
    "etd_euler",
    "etdrk2",
    "etdrk4",
    "etd_ab_weights",
    "etd_am_weights",
    "build_abnorsett",
    "build_pec",
    "build_pecec",
    "lawson4",
    "ablawson4",
    "load_tableau_file",
    "SchemeInfo",
    "REGISTRY",
    "get_scheme",
    "list_schemes",
    "empirical_order",
]

MAX_STAGES = 12
MAX_STEPS = 8

_ZERO = PhiExpr()


def _zero_grid(rows: int, cols: int) -> tuple:
    return tuple(tuple(_ZERO for _ in range(cols)) for _ in range(rows))


@dataclass
class Tableau:
    """Coefficients of one exponential general linear method.

    A[i][j], B[i], U[i][j], V[j] hold PhiExpr entries (index 0 = stage 1 /
    newest history value); a None entry marks a slot awaiting
    complete_summation.  stage_source optionally redirects the propagator
    of a stage: source j means stage i is built from e^{(C_i - C_j) h L}
    v^j with the row coefficients in stage_source_coeffs, reproducing
    formulas that chain one stage from another instead of from u^n.
    """

    name: str
    order: int
    stages: int
    steps: int
    C: tuple
    A: tuple
    B: tuple
    U: tuple = ()
    V: tuple = ()
    satisfies_summation: bool = True
    stage_source: dict = field(default_factory=dict)
    stage_source_coeffs: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        s, q = self.stages, self.steps
        if not 1 <= s <= MAX_STAGES:
            raise ValueError(f"stages must be in [1, {MAX_STAGES}], got {s}")
        if not 1 <= q <= MAX_STEPS:
            raise ValueError(f"steps must be in [1, {MAX_STEPS}], got {q}")
        if self.order < 1:
            raise ValueError(f"order must be positive, got {self.order}")
        self.C = tuple(Fraction(c) for c in self.C)
        if len(self.C) != s:
            raise ValueError(f"C must have one node per stage ({s}), got {len(self.C)}")
        if self.C[0] != 0:
            raise ValueError(f"stage 1 is u^n itself, so C[0] must be 0, got {self.C[0]}")
        if not self.U:
            self.U = _zero_grid(s, q - 1)
        if not self.V:
            self.V = tuple(_ZERO for _ in range(q - 1))
        self.A = tuple(tuple(row) for row in self.A)
        self.U = tuple(tuple(row) for row in self.U)
        self.B = tuple(self.B)
        self.V = tuple(self.V)
        if len(self.A) != s or any(len(row) != s for row in self.A):
            raise ValueError(f"A must be {s}x{s}")
        if len(self.B) != s:
            raise ValueError(f"B must have {s} entries")
        if len(self.U) != s or any(len(row) != q - 1 for row in self.U):
            raise ValueError(f"U must be {s}x{q - 1}")
        if len(self.V) != q - 1:
            raise ValueError(f"V must have {q - 1} entries")
        for i in range(s):
            for j in range(s):
                e = self.A[i][j]
                if j >= i and e is not None and not e.is_zero():
                    raise ValueError(f"A[{i + 1}][{j + 1}] must be zero: stages are explicit")
                if e is None and j != 0:
                    raise ValueError("only first-column A entries may await summation")
        for i in range(s):
            for j in range(q - 1):
                if self.U[i][j] is None:
                    raise ValueError("U entries cannot await summation")
                if i == 0 and not self.U[i][j].is_zero():
                    raise ValueError("stage 1 is u^n itself and takes no history terms")
        if any(v is None for v in self.V):
            raise ValueError("V entries cannot await summation")
        if any(b is None for b in self.B[1:]):
            raise ValueError("only B[1] may await summation")
        for i, j in self.stage_source.items():
            if not (2 <= i <= s and 1 <= j < i):
                raise ValueError(f"stage source {i} <- {j} out of range")
        for (i, j) in self.stage_source_coeffs:
            if i not in self.stage_source or not 1 <= j < i:
                raise ValueError(f"source coefficient ({i},{j}) without a stage source")

    @property
    def is_complete(self) -> bool:
        return self.B[0] is not None and all(row[0] is not None for row in self.A)

    def coefficients_equal(self, other: "Tableau") -> bool:
        """Structural equality of the merged coefficients (names aside)."""
        return (
            (self.order, self.stages, self.steps, self.C)
            == (other.order, other.stages, other.steps, other.C)
            and self.A == other.A
            and self.B == other.B
            and self.U == other.U
            and self.V == other.V
        )


def summation_residuals(t: Tableau) -> list[PhiExpr]:
    """B-row and per-stage residuals of the summation property (zero exprs
    when the property holds symbolically)."""
    if not t.is_complete:
        raise ValueError("tableau has unfilled slots; run complete_summation first")
    res = [sum(t.B, _ZERO) + sum(t.V, _ZERO) - phi(1)]
    for i in range(1, t.stages):
        row = sum(t.A[i], _ZERO) + sum(t.U[i], _ZERO) - psi(1, t.C[i])
        res.append(row)
    return res


def complete_summation(t: Tableau) -> Tableau:
    """Fill B[1] and first-column A entries from the summation property."""
    if not t.satisfies_summation:
        raise ValueError(f"{t.name} does not satisfy the summation property")
    B = list(t.B)
    if B[0] is None:
        B[0] = phi(1) - sum(B[1:], _ZERO) - sum(t.V, _ZERO)
    A = [list(row) for row in t.A]
    for i in range(1, t.stages):
        if A[i][0] is None:
            A[i][0] = psi(1, t.C[i]) - sum(A[i][1:], _ZERO) - sum(t.U[i], _ZERO)
    return replace(t, A=tuple(tuple(r) for r in A), B=tuple(B))


# ---------------------------------------------------------------------------
# exact Lagrange machinery for the Adams-type weights


def _poly_mul(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return out


def _lagrange_basis(nodes: Sequence[Fraction]) -> list[list[Fraction]]:
    """Monomial coefficients of each Lagrange cardinal polynomial."""
    basis = []
    for i, xi in enumerate(nodes):
        poly = [Fraction(1)]
        denom = Fraction(1)
        for j, xj in enumerate(nodes):
            if j != i:
                poly = _poly_mul(poly, [-xj, Fraction(1)])
                denom *= xi - xj
        basis.append([c / denom for c in poly])
    return basis


def _etd_weights(nodes: Sequence[Fraction]) -> list[PhiExpr]:
    """Exponential quadrature weights over [t_n, t_n + h] for the given
    interpolation nodes (in units of h, relative to t_n), using
    int_0^1 e^{(1-t) z} t^j dt = j! phi_{j+1}(z)."""
    weights = []
    for coeffs in _lagrange_basis(nodes):
        expr = _ZERO
        for j, a in enumerate(coeffs):
            if a != 0:
                expr = expr + phi(j + 1, a * math.factorial(j))
        weights.append(expr)
    return weights


def etd_ab_weights(q: int) -> tuple[PhiExpr, tuple[PhiExpr, ...]]:
    """Adams-Bashforth-type weights for nodes 0, -1, ..., -(q-1), returned
    as (B1, V): B1 multiplies N(u^n) and V[i-1] multiplies N(u^{n-i})."""
    if not 2 <= q <= MAX_STEPS:
        raise ValueError(f"q must be in [2, {MAX_STEPS}], got {q}")
    w = _etd_weights([Fraction(-i) for i in range(q)])
    return w[0], tuple(w[1:])


def etd_am_weights(q: int) -> tuple[PhiExpr, ...]:
    """Adams-Moulton-type weights for nodes 1, 0, -1, ..., -(q-2); entry 0
    multiplies the (predicted) N at t_{n+1}, entry 1 multiplies N(u^n)."""
    if not 2 <= q <= MAX_STEPS:
        raise ValueError(f"q must be in [2, {MAX_STEPS}], got {q}")
    return tuple(_etd_weights([Fraction(1 - i) for i in range(q)]))


# ---------------------------------------------------------------------------
# catalog builders


def etd_euler() -> Tableau:
    """First-order ETD scheme u^{n+1} = e^{hL} u^n + h phi_1(hL) N(u^n)."""
    return Tableau(
        name="etdeuler", order=1, stages=1, steps=1,
        C=(0,), A=((_ZERO,),), B=(phi(1),),
    )


def etdrk2() -> Tableau:
    """Second-order ETD Runge-Kutta scheme (exponential Heun)."""
    t = Tableau(
        name="etdrk2", order=2, stages=2, steps=1,
        C=(0, 1),
        A=((_ZERO, _ZERO), (phi(1), _ZERO)),
        B=(None, phi(2)),
    )
    return complete_summation(t)


def etdrk4() -> Tableau:
    """Fourth-order ETD Runge-Kutta scheme (Cox & Matthews).

    Stage 4 is chained from stage 2 in the original formulation,
    v^4 = e^{hL/2} v^2 + (h/2) phi_1(hL/2) (2 N(v^3) - N(v^1)),
    recorded here as a stage-source override; the equivalent strict-form
    first column follows from the summation property (A41 = phi1 - 2 psi_12
    with A42 = 0, A43 = 2 psi_12).
    """
    half = Fraction(1, 2)
    psi12 = psi(1, half)
    t = Tableau(
        name="etdrk4", order=4, stages=4, steps=1,
        C=(0, half, half, 1),
        A=(
            (_ZERO, _ZERO, _ZERO, _ZERO),
            (psi12, _ZERO, _ZERO, _ZERO),
            (None, psi12, _ZERO, _ZERO),
            (None, _ZERO, 2 * psi12, _ZERO),
        ),
        B=(None, 2 * phi(2) - 4 * phi(3), 2 * phi(2) - 4 * phi(3), 4 * phi(3) - phi(2)),
        stage_source={4: 2},
        stage_source_coeffs={(4, 1): -1 * psi12, (4, 3): 2 * psi12},
    )
    return complete_summation(t)


def build_abnorsett(q: int) -> Tableau:
    """ETD Adams-Bashforth scheme of order q (one stage, q steps)."""
    if not 4 <= q <= 6:
        raise ValueError(f"order must be in [4, 6], got {q}")
    _, hist = etd_ab_weights(q)
    t = Tableau(
        name=f"abnorsett{q}", order=q, stages=1, steps=q,
        C=(0,), A=((_ZERO,),), B=(None,),
        U=(tuple(_ZERO for _ in range(q - 1)),),
        V=hist,
    )
    return complete_summation(t)


def build_pec(p: int) -> Tableau:
    """Predict-evaluate-correct scheme of order p: ETD Adams-Bashforth of
    order p-1 predicts, the order-p ETD Adams-Moulton corrects once."""
    if not 4 <= p <= 7:
        raise ValueError(f"order must be in [4, 7], got {p}")
    q = p - 1
    _, pred_hist = etd_ab_weights(p - 1)
    cw = etd_am_weights(p)
    t = Tableau(
        name=f"pec{p}2{q}", order=p, stages=2, steps=q,
        C=(0, 1),
        A=((_ZERO, _ZERO), (None, _ZERO)),
        B=(None, cw[0]),
        U=(tuple(_ZERO for _ in range(q - 1)), pred_hist),
        V=tuple(cw[2:]),
    )
    return complete_summation(t)


def build_pecec(p: int) -> Tableau:
    """Like build_pec but with the corrector applied twice (PECEC)."""
    if not 4 <= p <= 7:
        raise ValueError(f"order must be in [4, 7], got {p}")
    q = p - 1
    _, pred_hist = etd_ab_weights(p - 1)
    cw = etd_am_weights(p)
    zrow = tuple(_ZERO for _ in range(q - 1))
    t = Tableau(
        name=f"pecec{p}3{q}", order=p, stages=3, steps=q,
        C=(0, 1, 1),
        A=(
            (_ZERO, _ZERO, _ZERO),
            (None, _ZERO, _ZERO),
            (None, cw[0], _ZERO),
        ),
        B=(None, _ZERO, cw[0]),
        U=(zrow, pred_hist, tuple(cw[2:])),
        V=tuple(cw[2:]),
    )
    return complete_summation(t)


def lawson4() -> Tableau:
    """Lawson's integrating-factor RK4: classical RK4 applied to the
    exponentially transformed variable e^{-Lt} u."""
    half = Fraction(1, 2)
    return Tableau(
        name="lawson4", order=4, stages=4, steps=1,
        C=(0, half, half, 1),
        A=(
            (_ZERO, _ZERO, _ZERO, _ZERO),
            (exp_term(half, half), _ZERO, _ZERO, _ZERO),
            (_ZERO, const_term(half), _ZERO, _ZERO),
            (_ZERO, _ZERO, exp_term(1, half), _ZERO),
        ),
        B=(
            exp_term(Fraction(1, 6), 1),
            exp_term(Fraction(1, 3), half),
            exp_term(Fraction(1, 3), half),
            const_term(Fraction(1, 6)),
        ),
        satisfies_summation=False,
    )


def ablawson4() -> Tableau:
    """Integrating-factor Adams-Bashforth 4: classical AB4 weights carried
    through the exponential transform."""
    return Tableau(
        name="ablawson4", order=4, stages=1, steps=4,
        C=(0,), A=((_ZERO,),),
        B=(exp_term(Fraction(55, 24), 1),),
        U=(tuple(_ZERO for _ in range(3)),),
        V=(
            exp_term(Fraction(-59, 24), 2),
            exp_term(Fraction(37, 24), 3),
            exp_term(Fraction(-9, 24), 4),
        ),
        satisfies_summation=False,
    )


# ---------------------------------------------------------------------------
# tableau files

_HEADER_KEYS = {"name", "order", "stages", "steps", "c", "summation"}
_TERM_RE = re.compile(
    r"""^(?:(?P<coeff>[+-]?[\d./eE+-]+)\s*\*\s*)?      # optional coefficient
         (?:(?P<kind>phi(?P<index>\d+)|exp)\s*\(\s*
            (?:(?P<scale>[+-]?[\d./eE+-]+)\s*\*\s*)?z\s*\)
          | (?P<const>[+-]?[\d./eE+-]+))$""",
    re.VERBOSE,
)


def _parse_rational(text: str, lineno: int):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise TableauFileError(f"line {lineno}: not a rational number: {text!r}")


def _parse_expr(text: str, lineno: int) -> PhiExpr:
    # split into signed terms at top level (no parentheses nesting in the grammar)
    src = text.strip()
    if not src:
        raise TableauFileError(f"line {lineno}: empty coefficient expression")
    pieces = re.split(r"(?<![eE*(/+-])\s*([+-])\s*", " " + src)
    # pieces: ['', maybe sign, term, sign, term, ...]
    terms, sign = [], 1
    for piece in pieces:
        piece = piece.strip()
        if not piece:
            continue
        if piece == "+":
            continue
        if piece == "-":
            sign = -sign
            continue
        m = _TERM_RE.match(piece)
        if not m:
            raise TableauFileError(f"line {lineno}: cannot parse term {piece!r}")
        coeff = sign * _parse_rational(m.group("coeff") or "1", lineno)
        sign = 1
        if m.group("const") is not None:
            terms.append(const_term(coeff * _parse_rational(m.group("const"), lineno)))
        else:
            scale = _parse_rational(m.group("scale") or "1", lineno)
            if m.group("kind") == "exp":
                terms.append(exp_term(coeff, scale))
            else:
                terms.append(phi(int(m.group("index")), coeff, scale))
    return sum(terms, _ZERO)


_SLOT_RE = re.compile(r"^(?P<mat>[ABUV])\s*\[\s*(?P<i>\d+)\s*\](?:\s*\[\s*(?P<j>\d+)\s*\])?$")


def load_tableau_file(path) -> Tableau:
    """Parse a plain-text tableau file.

    Grammar (one statement per line, '#' starts a comment)::

        name: MyScheme            # header fields, any order, before entries
        order: 4
        stages: 4
        steps: 1
        summation: yes            # optional, default yes
        C: 0 1/2 1/2 1
        A[3][2] = 0.5*phi1(0.5*z) # entries: sums of c, c*phi{l}(a*z),
        B[2] = 2*phi2(z)-4*phi3(z)#          c*exp(a*z); rationals or decimals
        B[1] = sum                # slot filled from the summation property
        V[1] = -59/24*exp(2*z)

    Unlisted entries are zero.  Raises TableauFileError with the offending
    line number on malformed input.
    """
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    headers: dict = {}
    entries: list = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" in line and "=" not in line:
            key, _, value = line.partition(":")
            key = key.strip().lower()
            if key not in _HEADER_KEYS:
                raise TableauFileError(f"line {lineno}: unknown header {key!r}")
            headers[key] = (value.strip(), lineno)
            continue
        if "=" in line:
            slot, _, value = line.partition("=")
            m = _SLOT_RE.match(slot.strip())
            if not m:
                raise TableauFileError(f"line {lineno}: bad entry slot {slot.strip()!r}")
            entries.append((m, value.strip(), lineno))
            continue
        raise TableauFileError(f"line {lineno}: expected 'key: value' or 'SLOT = expr'")

    for required in ("name", "order", "stages", "steps", "c"):
        if required not in headers:
            raise TableauFileError(f"missing required header {required!r}")
    name = headers["name"][0]
    try:
        order = int(headers["order"][0])
        s = int(headers["stages"][0])
        q = int(headers["steps"][0])
    except ValueError:
        raise TableauFileError("order, stages and steps must be integers")
    summation = True
    if "summation" in headers:
        val, lineno = headers["summation"]
        if val.lower() not in ("yes", "no", "true", "false"):
            raise TableauFileError(f"line {lineno}: summation must be yes or no")
        summation = val.lower() in ("yes", "true")
    cval, clineno = headers["c"]
    C = tuple(_parse_rational(tok, clineno) for tok in cval.split())
    if len(C) != s:
        raise TableauFileError(f"line {clineno}: C needs {s} nodes, got {len(C)}")

    A = [[_ZERO] * s for _ in range(s)]
    B: list = [_ZERO] * s
    U = [[_ZERO] * (q - 1) for _ in range(s)]
    V: list = [_ZERO] * (q - 1)
    for m, value, lineno in entries:
        mat = m.group("mat")
        i = int(m.group("i"))
        j = int(m.group("j")) if m.group("j") else None
        filled = None if value.strip().lower() == "sum" else _parse_expr(value, lineno)
        if filled is None and not summation:
            raise TableauFileError(
                f"line {lineno}: 'sum' needs the summation property (summation: yes)"
            )
        if mat in ("A", "U") and j is None or mat in ("B", "V") and j is not None:
            raise TableauFileError(f"line {lineno}: wrong number of indices for {mat}")
        try:
            if mat == "A":
                if not (1 <= j < i <= s):
                    raise TableauFileError(
                        f"line {lineno}: A[{i}][{j}] outside the strictly lower triangle"
                    )
                A[i - 1][j - 1] = filled
            elif mat == "B":
                if not 1 <= i <= s:
                    raise IndexError
                B[i - 1] = filled
            elif mat == "U":
                if not (2 <= i <= s and 1 <= j <= q - 1):
                    raise IndexError
                U[i - 1][j - 1] = filled
            else:
                if not 1 <= i <= q - 1:
                    raise IndexError
                V[i - 1] = filled
        except IndexError:
            raise TableauFileError(f"line {lineno}: {mat} index out of range")
        if filled is None and not (mat == "B" and i == 1 or mat == "A" and j == 1):
            raise TableauFileError(f"line {lineno}: only B[1] and A[i][1] support 'sum'")

    try:
        t = Tableau(
            name=name, order=order, stages=s, steps=q, C=C,
            A=tuple(tuple(r) for r in A), B=tuple(B),
            U=tuple(tuple(r) for r in U), V=tuple(V),
            satisfies_summation=summation,
        )
        if not t.is_complete:
            t = complete_summation(t)
    except ValueError as exc:
        raise TableauFileError(str(exc))
    if summation:
        bad = [e for e in summation_residuals(t) if not e.is_zero()]
        if bad:
            raise TableauFileError(
                f"{name}: declared summation property does not hold ({bad[0]!r})"
            )
    return t


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class SchemeInfo:
    """Catalog row: how to display a scheme and how to build/run it."""

    name: str
    display: str
    family: str
    order: int
    stages: int
    steps: int
    build: Optional[Callable[[], Tableau]] = None  # None: runs via a dedicated engine path
    engine: str = "tableau"  # or "genlawson"

    def tableau(self) -> Tableau:
        if self.build is None:
            raise ValueError(f"{self.name} has no tableau form; it runs via its own engine")
        return self.build()


def _registry() -> dict[str, SchemeInfo]:
    rows: list[SchemeInfo] = [
        SchemeInfo("etdeuler", "ETD Euler", "ETD Runge–Kutta", 1, 1, 1, etd_euler),
        SchemeInfo("etdrk2", "ETDRK2", "ETD Runge–Kutta", 2, 2, 1, etdrk2),
        SchemeInfo("etdrk4", "ETDRK4", "ETD Runge–Kutta", 4, 4, 1, etdrk4),
    ]
    for q in (4, 5, 6):
        rows.append(
            SchemeInfo(
                f"abnorsett{q}", f"ABNørsett{q}", "ETD Adams–Bashforth",
                q, 1, q, lambda q=q: build_abnorsett(q),
            )
        )
    rows.append(SchemeInfo("ablawson4", "ABLawson4", "Lawson", 4, 1, 4, ablawson4))
    rows.append(SchemeInfo("lawson4", "Lawson4", "Lawson", 4, 4, 1, lawson4))
    for q, order in ((1, 4), (2, 4), (3, 4), (4, 5), (5, 6)):
        rows.append(
            SchemeInfo(
                f"genlawson4{q}", f"GenLawson4{q}", "Gen. Lawson",
                order, 4, q, None, engine="genlawson",
            )
        )
    for p in (4, 5, 6, 7):
        rows.append(
            SchemeInfo(
                f"pec{p}2{p - 1}", f"PEC{p}2{p - 1}", "Exp. Predictor-Corrector",
                p, 2, p - 1, lambda p=p: build_pec(p),
            )
        )
        rows.append(
            SchemeInfo(
                f"pecec{p}3{p - 1}", f"PECEC{p}3{p - 1}", "Exp. Predictor-Corrector",
                p, 3, p - 1, lambda p=p: build_pecec(p),
            )
        )
    return {row.name: row for row in rows}


REGISTRY: dict[str, SchemeInfo] = _registry()


def get_scheme(name: str) -> SchemeInfo:
    """Look up a catalog scheme by its lowercase registry name."""
    key = name.lower()
    if key not in REGISTRY:
        raise KeyError(
            f"unknown scheme {name!r}; available: {', '.join(sorted(REGISTRY))}"
        )
    return REGISTRY[key]


def list_schemes() -> list[SchemeInfo]:
    return list(REGISTRY.values())


# ---------------------------------------------------------------------------


def empirical_order(scheme, h_set: Optional[Sequence[float]] = None, probe=None) -> float:
    """Least-squares slope of log error vs log h on a scalar stiff probe.

    scheme may be a registry name, SchemeInfo or Tableau.  The default
    probe is u' = -u + u^2, u(0) = 1/2, T = 1, whose exact solution
    1/(1 + e^t) pins the error; h_set defaults to a geometric ladder sized
    to the declared order so no point sits on the rounding floor.
    """
    from .integrator import run_scalar_probe, ScalarProbe

    if probe is None:
        probe = ScalarProbe()
    declared = None
    if isinstance(scheme, Tableau):
        declared = scheme.order
    elif isinstance(scheme, (str, SchemeInfo)):
        info = scheme if isinstance(scheme, SchemeInfo) else get_scheme(scheme)
        declared = info.order
    if h_set is None:
        top = 14 if declared is None else max(8, 2 * declared)
        h_set = [probe.T / n for n in (top, 2 * top, 4 * top, 8 * top, 16 * top)]
    errors, steps = [], []
    for h in h_set:
        err = run_scalar_probe(scheme, probe, h)
        if math.isfinite(err) and err > 0:
            errors.append(err)
            steps.append(h)
    if len(errors) < 2:
        raise ValueError("not enough finite error points to estimate an order")
    # The error is measured against the probe's exact solution, so the only
    # contamination is accumulated roundoff; drop points down at that floor.
    pts = [(h, e) for h, e in zip(steps, errors) if e > 1e-13]
    if len(pts) < 2:
        pts = list(zip(steps, errors))
    xs = [math.log(h) for h, _ in pts]
    ys = [math.log(e) for _, e in pts]
    n = len(xs)
    xbar, ybar = sum(xs) / n, sum(ys) / n
    return sum((x - xbar) * (y - ybar) for x, y in zip(xs, ys)) / sum(
        (x - xbar) ** 2 for x in xs
    )
