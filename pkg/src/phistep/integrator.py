"""Time-stepping engine for exponential general linear methods.

The step update is

    u^{n+1} = e^{hL} u^n + h sum_i B_i(hL) N(v^i) + h sum_j V_j(hL) N(u^{n-j})

with internal stages

    v^i = e^{C_i hL} u^n + h sum_{j<i} A_ij(hL) N(v^j) + h sum_j U_ij(hL) N(u^{n-j})

where L is diagonal in coefficient space.  All tableau slots are
evaluated once per (tableau, h, L) by `precompute`; stepping then costs
s nonlinear evaluations (2s transforms) plus elementwise arithmetic.

Two step engines share the same state and bookkeeping:

* the tableau engine above, covering Runge-Kutta, multistep and
  predictor-corrector exponential schemes, including stage-source
  overrides (a stage propagated from an earlier stage rather than from
  u^n, as in the fourth stage of ETDRK4);
* a generalized Lawson engine that integrates the transformed variable
  v(t) = e^{-Lt}(u(t) - w(t)) with classical RK4, where w is the exact
  linear response to the degree-q polynomial interpolating the current
  nonlinear evaluation together with the q preceding ones.  The current
  time is always a node, so the first transformed stage derivative
  N(u^n) - P(t_n) vanishes identically and fixed points are preserved;
  interpolating through q past values raises the order to q + 1 once
  q + 1 exceeds the classical order 4 of the outer stages.

Multistep schemes are started by the fixed-point procedure
`start_multistep`: a low-order bootstrap followed by iterating

    u^j = e^{jhL} u^0 + h sum_l gamma_l(j, hL) Delta^l N(u^0)

with forward differences Delta^l taken over the current iterate's
nonlinear values, stopping when successive iterates agree to a relative
max-norm below h^q.
"""
from __future__ import annotations

import math
import time as _time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import UnstableError
from .phifun import ContourSpec, eval_phi_expr, gamma_contour, phi_contour
from .tableau import SchemeInfo, Tableau, _lagrange_basis, get_scheme

__all__ = [
    "PrecomputedScheme",
    "GenLawsonScheme",
    "SimState",
    "StarterResult",
    "IntegrationResult",
    "Snapshot",
    "ScalarProbe",
    "precompute",
    "precompute_gen_lawson",
    "prepare_scheme",
    "step",
    "gen_lawson_step",
    "start_multistep",
    "integrate",
    "run_scalar_probe",
    "MAX_AMPLIFICATION",
    "MAX_STARTER_ITERATIONS",
]

# a field whose max-norm exceeds this multiple of its initial value is
# declared unstable even before overflow produces non-finite entries
MAX_AMPLIFICATION = 1e10
MAX_STARTER_ITERATIONS = 50
# successive starter iterates this close (relative max-norm) are at the
# rounding floor; stopping there counts as converged even if h^q is smaller
STARTER_FLOOR = 1e-14


@dataclass(frozen=True)
class SimState:
    """The integration state after `step` completed steps of size h.

    history holds the most recent past nonlinear evaluations
    (N(u^{n-1}), ..., N(u^{n-(q-1)})); nl_current caches N(u^n) for
    schemes that reuse it (any scheme with q >= 2).
    """

    coeffs: np.ndarray
    time: float
    step: int
    nl_current: Optional[np.ndarray] = None
    history: tuple = ()
    initial_norm: float = 0.0


def _max_norm(arr: np.ndarray) -> float:
    return float(np.max(np.abs(arr)))


def _check_stable(coeffs: np.ndarray, time: float, step: int, initial_norm: float) -> None:
    top = _max_norm(coeffs)
    if not math.isfinite(top):
        raise UnstableError(
            f"non-finite field after step {step} (t = {time:.6g})", time=time, step=step
        )
    if initial_norm > 0 and top > MAX_AMPLIFICATION * initial_norm:
        raise UnstableError(
            f"field grew by {top / initial_norm:.3g}x after step {step} "
            f"(t = {time:.6g})", time=time, step=step,
        )


def _real_if(arr: np.ndarray, make_real: bool) -> np.ndarray:
    # contour evaluation returns exactly-zero imaginary parts for real
    # diagonals, so taking .real is lossless
    return np.ascontiguousarray(arr.real) if make_real else np.asarray(arr)


# ---------------------------------------------------------------------------
# tableau engine


@dataclass(frozen=True)
class PrecomputedScheme:
    """A tableau with every slot evaluated over the diagonal h*L.

    Coefficient arrays are the bare weight functions (not premultiplied
    by h); `step` supplies the factor h.  For real diagonals the arrays
    are real-valued.
    """

    name: str
    tableau: Tableau
    h: float
    lam: np.ndarray
    contour: ContourSpec
    propagator: np.ndarray
    stage_propagators: tuple
    source_propagators: dict
    A: dict
    U: dict
    B: dict
    V: dict

    @property
    def stages(self) -> int:
        return self.tableau.stages

    @property
    def steps(self) -> int:
        return self.tableau.steps

    def step(self, state: SimState, system) -> SimState:
        return step(state, self, system)


def _exp_cache(hlam: np.ndarray, make_real: bool):
    cache: dict = {}

    def propagator(c: Fraction) -> np.ndarray:
        if c not in cache:
            cache[c] = _real_if(np.exp(float(c) * hlam), make_real)
        return cache[c]

    return propagator


def precompute(tableau: Tableau, h: float, lam, contour: ContourSpec = ContourSpec()) -> PrecomputedScheme:
    """Evaluate every tableau slot entrywise at h*lam.

    Requires a complete tableau (summation property filled in, or a
    scheme exempt from it); h must be positive.  Deterministic for fixed
    inputs.
    """
    if not tableau.is_complete:
        raise ValueError(f"tableau {tableau.name!r} has unfilled slots; "
                         "complete the summation property first")
    if not h > 0:
        raise ValueError(f"step size must be positive, got {h}")
    lam = np.asarray(lam)
    make_real = bool(np.all(np.asarray(lam).imag == 0)) if np.iscomplexobj(lam) else True
    diag = np.ascontiguousarray(h * lam, dtype=np.complex128)

    def ev(expr) -> np.ndarray:
        return _real_if(eval_phi_expr(expr, diag, contour), make_real)

    exp_of = _exp_cache(diag, make_real)
    s, q = tableau.stages, tableau.steps
    stage_props = tuple(exp_of(tableau.C[i]) for i in range(s))
    source_props = {
        i: exp_of(tableau.C[i - 1] - tableau.C[src - 1])
        for i, src in tableau.stage_source.items()
    }
    A: dict = {}
    for i in range(2, s + 1):
        if i in tableau.stage_source:
            for (si, sj), expr in tableau.stage_source_coeffs.items():
                if si == i and not expr.is_zero():
                    A[(i, sj)] = ev(expr)
        else:
            for j in range(1, i):
                expr = tableau.A[i - 1][j - 1]
                if not expr.is_zero():
                    A[(i, j)] = ev(expr)
    U = {
        (i, j): ev(tableau.U[i - 1][j - 1])
        for i in range(1, s + 1)
        for j in range(1, q)
        if not tableau.U[i - 1][j - 1].is_zero()
    }
    B = {i: ev(tableau.B[i - 1]) for i in range(1, s + 1) if not tableau.B[i - 1].is_zero()}
    V = {j: ev(tableau.V[j - 1]) for j in range(1, q) if not tableau.V[j - 1].is_zero()}
    return PrecomputedScheme(
        name=tableau.name, tableau=tableau, h=h, lam=lam, contour=contour,
        propagator=exp_of(Fraction(1)), stage_propagators=stage_props,
        source_propagators=source_props, A=A, U=U, B=B, V=V,
    )


def _require_history(state: SimState, q: int, name: str) -> None:
    if q > 1 and (state.nl_current is None or len(state.history) < q - 1):
        raise ValueError(
            f"{name} needs {q - 1} past nonlinear values; run the starting "
            "procedure first"
        )


def step(state: SimState, scheme: PrecomputedScheme, system) -> SimState:
    """Advance one step with a precomputed tableau scheme.

    Evaluates the nonlinearity once per stage; for schemes with history
    (q >= 2) the first stage reuses the stored N(u^n) and the evaluation
    at the new solution is pushed into the history ring, keeping the
    total at s evaluations (2s transforms) per step.
    """
    tab = scheme.tableau
    s, q = tab.stages, tab.steps
    _require_history(state, q, scheme.name)
    h = scheme.h
    u = state.coeffs
    if q > 1:
        first_nl = state.nl_current
    else:
        first_nl = system.nonlinear(u)
    stage_nl = [first_nl]
    stage_values = [u]
    hist = state.history
    for i in range(2, s + 1):
        src = tab.stage_source.get(i)
        if src is not None:
            acc = scheme.source_propagators[i] * stage_values[src - 1]
        else:
            acc = scheme.stage_propagators[i - 1] * u
        for j in range(1, i):
            coeff = scheme.A.get((i, j))
            if coeff is not None:
                acc = acc + h * (coeff * stage_nl[j - 1])
        for j in range(1, q):
            coeff = scheme.U.get((i, j))
            if coeff is not None:
                acc = acc + h * (coeff * hist[j - 1])
        stage_values.append(acc)
        stage_nl.append(system.nonlinear(acc))
    out = scheme.propagator * u
    for i in range(1, s + 1):
        coeff = scheme.B.get(i)
        if coeff is not None:
            out = out + h * (coeff * stage_nl[i - 1])
    for j in range(1, q):
        coeff = scheme.V.get(j)
        if coeff is not None:
            out = out + h * (coeff * hist[j - 1])
    new_time = state.time + h
    new_step = state.step + 1
    _check_stable(out, new_time, new_step, state.initial_norm)
    if q > 1:
        nl_new = system.nonlinear(out)
        new_hist = (state.nl_current, *state.history)[: q - 1]
    else:
        nl_new = None
        new_hist = ()
    return SimState(
        coeffs=out, time=new_time, step=new_step, nl_current=nl_new,
        history=new_hist, initial_norm=state.initial_norm,
    )


# ---------------------------------------------------------------------------
# generalized Lawson engine


@dataclass(frozen=True)
class GenLawsonScheme:
    """Precomputed pieces of the q-step generalized Lawson method.

    The interpolant P passes through the current nonlinear value and the
    q preceding ones (q + 1 points, degree q) and is kept in monomial
    form in the step fraction theta = t/h: P(theta h) = sum_j c_j
    theta^j, with c = monomial_matrix @ history.  w_half/w_full hold the
    arrays j! alpha^{j+1} phi_{j+1}(alpha h L) for alpha = 1/2, 1, so
    the particular solution at the half and full step is
    W(alpha h) = h sum_j w[j] c_j.
    """

    name: str
    q: int  # past values interpolated; the stencil has q + 1 points
    h: float
    lam: np.ndarray
    contour: ContourSpec
    e_half: np.ndarray
    e_full: np.ndarray
    monomial_matrix: np.ndarray  # (q+1, q+1), row 0 is exactly (1, 0, ..., 0)
    w_half: tuple
    w_full: tuple
    half_powers: tuple  # (1/2)^j for P(h/2)

    stages = 4

    @property
    def steps(self) -> int:
        # solution values the state must retain: u^n plus q past ones
        return self.q + 1

    def step(self, state: SimState, system) -> SimState:
        return gen_lawson_step(state, self, system)


def precompute_gen_lawson(q: int, h: float, lam, contour: ContourSpec = ContourSpec()) -> GenLawsonScheme:
    """Propagators, phi arrays and the exact interpolation matrix for
    the q-step generalized Lawson method (classical RK4 outer stages,
    interpolation through the current and the q most recent past
    nonlinear values)."""
    if not 1 <= q <= 8:
        raise ValueError(f"generalized Lawson supports 1..8 steps, got {q}")
    if not h > 0:
        raise ValueError(f"step size must be positive, got {h}")
    lam = np.asarray(lam)
    make_real = bool(np.all(np.asarray(lam).imag == 0)) if np.iscomplexobj(lam) else True
    diag = np.ascontiguousarray(h * lam, dtype=np.complex128)
    e_half = _real_if(np.exp(0.5 * diag), make_real)
    e_full = _real_if(np.exp(diag), make_real)
    points = q + 1
    basis = _lagrange_basis([Fraction(-m) for m in range(points)])
    matrix = np.array([[float(basis[m][j]) for m in range(points)] for j in range(points)])
    matrix[0] = 0.0
    matrix[0, 0] = 1.0  # ell_m(0) = delta_m0 exactly on nodes {0, -1, ...}
    w_half = tuple(
        math.factorial(j) * 0.5 ** (j + 1)
        * _real_if(phi_contour(j + 1, 0.5 * diag, contour), make_real)
        for j in range(points)
    )
    w_full = tuple(
        math.factorial(j) * _real_if(phi_contour(j + 1, diag, contour), make_real)
        for j in range(points)
    )
    return GenLawsonScheme(
        name=f"genlawson4{q}", q=q, h=h, lam=lam, contour=contour,
        e_half=e_half, e_full=e_full, monomial_matrix=matrix,
        w_half=w_half, w_full=w_full,
        half_powers=tuple(0.5 ** j for j in range(points)),
    )


def gen_lawson_step(state: SimState, scheme: GenLawsonScheme, system) -> SimState:
    """One generalized Lawson step: classical RK4 on the transformed
    variable, expressed directly in stage values.

    With K_i = N(stage_i) - P(stage time) and W the particular solution,
    the stages are

        s2 = E2 u + W(h/2)
        s3 = E2 u + (h/2) K2 + W(h/2)
        s4 = E1 u + h E2 K3 + W(h)
        u' = E1 u + (h/6)(2 E2 K2 + 2 E2 K3 + K4) + W(h)

    where E2 = e^{hL/2}, E1 = e^{hL}; the first transformed stage
    derivative K1 = N(u^n) - P(0) vanishes identically.
    """
    q, h = scheme.q, scheme.h
    points = q + 1
    _require_history(state, points, scheme.name)
    u = state.coeffs
    nl_now = state.nl_current
    history = (nl_now, *state.history[:q])
    coeffs = [
        sum(scheme.monomial_matrix[j, m] * history[m] for m in range(points))
        for j in range(points)
    ]
    w_half = h * sum(scheme.w_half[j] * coeffs[j] for j in range(points))
    w_full = h * sum(scheme.w_full[j] * coeffs[j] for j in range(points))
    p_half = sum(scheme.half_powers[j] * coeffs[j] for j in range(points))
    p_full = sum(coeffs)

    e_half, e_full = scheme.e_half, scheme.e_full
    s2 = e_half * u + w_half
    k2 = system.nonlinear(s2) - p_half
    s3 = e_half * u + (0.5 * h) * k2 + w_half
    k3 = system.nonlinear(s3) - p_half
    s4 = e_full * u + h * (e_half * k3) + w_full
    k4 = system.nonlinear(s4) - p_full
    out = e_full * u + (h / 6.0) * (2.0 * (e_half * k2) + 2.0 * (e_half * k3) + k4) + w_full
    new_time = state.time + h
    new_step = state.step + 1
    _check_stable(out, new_time, new_step, state.initial_norm)
    nl_new = system.nonlinear(out)
    new_hist = (nl_now, *state.history)[:q]
    return SimState(
        coeffs=out, time=new_time, step=new_step, nl_current=nl_new,
        history=new_hist, initial_norm=state.initial_norm,
    )


# ---------------------------------------------------------------------------
# scheme preparation


SchemeLike = Union[str, SchemeInfo, Tableau]


def prepare_scheme(scheme: SchemeLike, h: float, lam, contour: ContourSpec = ContourSpec()):
    """Resolve a scheme name, registry entry, or explicit tableau into a
    precomputed step engine."""
    if isinstance(scheme, Tableau):
        return precompute(scheme, h, lam, contour)
    info = get_scheme(scheme) if isinstance(scheme, str) else scheme
    if not isinstance(info, SchemeInfo):
        raise TypeError(f"cannot prepare a scheme from {type(scheme).__name__}")
    if info.engine == "genlawson":
        return precompute_gen_lawson(info.steps, h, lam, contour)
    return precompute(info.tableau(), h, lam, contour)


# ---------------------------------------------------------------------------
# multistep starting procedure


@dataclass(frozen=True)
class StarterResult:
    """Starting values u^0..u^{q-1} and a stepping-ready state at step q-1."""

    state: SimState
    states: tuple
    converged: bool
    iterations: int


def _forward_differences(values: Sequence[np.ndarray]) -> list:
    """Delta^l of the sequence at its first entry, for l = 0..len-1."""
    diffs = [values[0]]
    current = list(values)
    for _ in range(1, len(values)):
        current = [b - a for a, b in zip(current, current[1:])]
        diffs.append(current[0])
    return diffs


def start_multistep(
    q: int,
    h: float,
    system,
    u0: np.ndarray,
    contour: ContourSpec = ContourSpec(),
    *,
    bootstrap: SchemeLike = "etdrk2",
    delta0_state: bool = False,
    initial_norm: Optional[float] = None,
) -> StarterResult:
    """Compute starting values u^1..u^{q-1} for a q-step scheme.

    Bootstraps with a low-order one-step scheme, then iterates the
    fixed-point map

        u^j = e^{jhL} u^0 + h sum_{l<q} gamma_l(j, hL) Delta^l N(u^0)

    where the forward differences run over the current iterate's
    nonlinear values.  Stops when successive iterates agree to a
    relative max-norm below h^q (or the rounding floor), or after 50
    iterations with converged=False.

    delta0_state reproduces a printed variant in which the l = 0 term
    uses the state u^0 itself instead of N(u^0); it is provided for
    comparison only and is not the default.
    """
    if q < 2:
        raise ValueError(f"starting procedure applies to q >= 2, got q={q}")
    if initial_norm is None:
        initial_norm = _max_norm(u0)
    lam = np.asarray(system.lam)
    diag = np.ascontiguousarray(h * lam, dtype=np.complex128)
    make_real = bool(np.all(diag.imag == 0))

    boot = prepare_scheme(bootstrap, h, lam, contour)
    state = SimState(coeffs=u0, time=0.0, step=0, initial_norm=initial_norm)
    states = [u0]
    for _ in range(q - 1):
        state = boot.step(state, system)
        states.append(state.coeffs)

    gammas = {
        (l, j): _real_if(gamma_contour(l, j, diag, contour), make_real)
        for j in range(1, q)
        for l in range(q)
    }
    propagators = {
        j: _real_if(np.exp(float(j) * diag), make_real) for j in range(1, q)
    }
    nl_values = [system.nonlinear(u) for u in states]
    converged = False
    iterations = 0
    tol = max(h ** q, STARTER_FLOOR)
    for iterations in range(1, MAX_STARTER_ITERATIONS + 1):
        diffs = _forward_differences(nl_values)
        if delta0_state:
            diffs[0] = states[0]
        new_states = [states[0]]
        for j in range(1, q):
            acc = propagators[j] * states[0]
            for l in range(q):
                acc = acc + h * (gammas[(l, j)] * diffs[l])
            new_states.append(acc)
        scale = max(_max_norm(u) for u in new_states[1:])
        change = max(
            _max_norm(new - old) for new, old in zip(new_states[1:], states[1:])
        )
        if not math.isfinite(scale) or not math.isfinite(change):
            raise UnstableError(
                "starting procedure produced non-finite values",
                time=(q - 1) * h, step=q - 1,
            )
        states = new_states
        for j in range(1, q):
            nl_values[j] = system.nonlinear(states[j])
        if scale == 0.0 or change <= tol * scale:
            converged = True
            break
    final = SimState(
        coeffs=states[q - 1],
        time=(q - 1) * h,
        step=q - 1,
        nl_current=nl_values[q - 1],
        history=tuple(nl_values[q - 2 :: -1]),
        initial_norm=initial_norm,
    )
    return StarterResult(
        state=final, states=tuple(states), converged=converged, iterations=iterations
    )


# ---------------------------------------------------------------------------
# full integration


@dataclass(frozen=True)
class Snapshot:
    requested_time: float
    time: float
    step: int
    coeffs: np.ndarray


@dataclass(frozen=True)
class IntegrationResult:
    """Final coefficients plus bookkeeping for one integration.

    seconds and fft_count cover the stepping loop only: coefficient
    precomputation and the multistep starting procedure are excluded
    (fft_total counts everything).  h is the snapped step T/steps.
    """

    u: np.ndarray
    scheme: str
    h: float
    T: float
    steps: int
    seconds: float
    fft_count: int
    fft_total: int
    starter_converged: bool
    starter_iterations: int
    snapshots: tuple = ()


def _snap_steps(h: float, T: float, nsteps: int, times: Sequence[float]) -> dict:
    table: dict = {}
    for t in times:
        idx = int(round(float(t) / h))
        idx = min(max(idx, 0), nsteps)
        table.setdefault(idx, []).append(float(t))
    return table


def integrate(
    system,
    scheme: SchemeLike,
    h: float,
    T: float,
    *,
    contour: Optional[ContourSpec] = None,
    snapshot_times: Sequence[float] = (),
    delta0_state: bool = False,
) -> IntegrationResult:
    """Integrate u' = L u + N(u) from the system's initial data to time T.

    h is snapped to T/ceil(T/h) so the horizon is an exact multiple of
    the step (the snapped value is recorded on the result).  Multistep
    schemes run the starting procedure first; its cost, like coefficient
    precomputation, is excluded from the reported stepping time.
    Snapshots are taken at the completed step nearest each requested
    time.  Instability raises UnstableError carrying the failing time.
    """
    from .spectral import install_fft_counter, remove_fft_counter

    if not T > 0:
        raise ValueError(f"horizon must be positive, got {T}")
    if not h > 0:
        raise ValueError(f"step size must be positive, got {h}")
    if contour is None:
        grid = getattr(system, "grid", None)
        points = 64 if grid is None or grid.dims == 1 else 32
        contour = ContourSpec(points=points)
    nsteps = max(1, math.ceil(T / h - 1e-9))
    h = T / nsteps

    cell, token = install_fft_counter()
    try:
        engine = prepare_scheme(scheme, h, system.lam, contour)
        q = engine.steps
        u0 = np.array(system.u0, dtype=complex, copy=True)
        initial_norm = _max_norm(u0)
        snap_table = _snap_steps(h, T, nsteps, snapshot_times)
        snapshots = []

        def record(idx: int, coeffs: np.ndarray) -> None:
            for t_req in snap_table.get(idx, ()):
                snapshots.append(
                    Snapshot(requested_time=t_req, time=idx * h, step=idx,
                             coeffs=np.array(coeffs, copy=True))
                )

        record(0, u0)
        if q > 1:
            if nsteps < q - 1:
                raise ValueError(
                    f"{engine.name} needs at least {q - 1} steps but the "
                    f"horizon allows only {nsteps}"
                )
            starter = start_multistep(
                q, h, system, u0, contour, delta0_state=delta0_state,
                initial_norm=initial_norm,
            )
            state = starter.state
            converged, iterations = starter.converged, starter.iterations
            for j in range(1, q):
                record(j, starter.states[j])
        else:
            state = SimState(coeffs=u0, time=0.0, step=0, initial_norm=initial_norm)
            converged, iterations = True, 0

        fft_start = cell[0]
        tic = _time.perf_counter()
        while state.step < nsteps:
            state = engine.step(state, system)
            if state.step in snap_table:
                record(state.step, state.coeffs)
        seconds = _time.perf_counter() - tic
        fft_count = cell[0] - fft_start
        fft_total = cell[0]
    finally:
        remove_fft_counter(token)

    return IntegrationResult(
        u=state.coeffs, scheme=engine.name, h=h, T=T, steps=nsteps,
        seconds=seconds, fft_count=fft_count, fft_total=fft_total,
        starter_converged=converged, starter_iterations=iterations,
        snapshots=tuple(snapshots),
    )


# ---------------------------------------------------------------------------
# scalar probe


def _square(u: np.ndarray) -> np.ndarray:
    return u * u


@dataclass(frozen=True)
class ScalarProbe:
    """A scalar stiff test problem; the default is u' = -u + u^2 from
    u(0) = 1/2 to T = 1, split as L = -1, N(u) = u^2, whose solution is
    the logistic decay 1/(1 + e^t)."""

    lam: complex = -1.0
    u0: complex = 0.5
    T: float = 1.0
    func: Callable[[np.ndarray], np.ndarray] = _square
    exact: Optional[Callable[[float], complex]] = None

    def solution(self, t: float) -> complex:
        if self.exact is not None:
            return self.exact(t)
        if self.lam != -1.0 or self.func is not _square:
            raise ValueError("non-default probe needs an explicit exact solution")
        ratio = 1.0 / self.u0 - 1.0
        return 1.0 / (1.0 + ratio * math.exp(t))


@dataclass(frozen=True)
class _ProbeSystem:
    lam: np.ndarray
    u0: np.ndarray
    func: Callable
    real: bool = False
    name: str = "scalar-probe"

    def nonlinear(self, coeffs: np.ndarray) -> np.ndarray:
        return self.func(coeffs)


def run_scalar_probe(scheme: SchemeLike, probe: Optional[ScalarProbe] = None, h: float = 0.05) -> float:
    """Relative error of one integration of the scalar probe at step h.

    Multistep history is seeded from the probe's exact solution, so the
    returned error reflects the stepping formula alone; the fixed-point
    starting procedure is exercised separately through `start_multistep`
    and `integrate`.
    """
    if probe is None:
        probe = ScalarProbe()
    lam = np.array([probe.lam], dtype=complex)
    system = _ProbeSystem(
        lam=lam,
        u0=np.array([probe.u0], dtype=complex),
        func=probe.func,
    )
    nsteps = max(1, math.ceil(probe.T / h - 1e-9))
    h = probe.T / nsteps
    prepared = prepare_scheme(scheme, h, lam)
    q = prepared.steps
    if nsteps < q - 1:
        raise ValueError(
            f"a {q}-step scheme needs at least {q - 1} steps; "
            f"T={probe.T} at h={h} gives only {nsteps}"
        )
    values = [np.array([complex(probe.solution(j * h))]) for j in range(q)]
    nl = [system.nonlinear(v) for v in values]
    state = SimState(
        coeffs=values[-1],
        time=(q - 1) * h,
        step=q - 1,
        nl_current=nl[-1],
        history=tuple(nl[-2::-1]),
        initial_norm=float(abs(complex(probe.u0))),
    )
    while state.step < nsteps:
        state = prepared.step(state, system)
    want = complex(probe.solution(probe.T))
    return abs(complex(state.coeffs[0]) - want) / abs(want)
