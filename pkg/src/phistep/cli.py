"""Command-line front end for the integrator catalog and benchmark harness.

Subcommands: ``list`` (catalogs), ``run`` (one integration, snapshots,
stats), ``bench`` (scheme/step-size sweeps with CSV/SVG/JSON output),
``order`` (convergence-order estimates), and ``selftest`` (numerical
kernel checks with a pass/fail table).

Exit codes: 0 success, 2 invalid manifest or arguments, 3 numerical
instability (the failing time is printed).  Output files land in the
directory given by ``--out``, else the ``PHISTEP_OUT`` environment
variable, else ``./phistep_out``.

Manifest files are JSON with optional full-line ``#`` comments; the
``bench`` subcommand writes a manifest echo alongside its results that
can be fed back through ``--manifest`` to reproduce the same sweep
(identical CSVs apart from the timing column).
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .bench import (
    estimate_order,
    export,
    make_plan,
    plan_from_manifest,
    plan_to_manifest,
    read_records,
    rel_l2_error,
    run_sweep,
    save_field,
)
from .errors import NoDataError, PhistepError, UnstableError
from .integrator import _ProbeSystem, integrate
from .phifun import ContourSpec, phi_contour, phi_scalar
from .problems import NLS_A, NLS_B, default_grid, discretize, get_problem, nls_breather, problem_names
from .spectral import to_values
from .tableau import REGISTRY, empirical_order, get_scheme, list_schemes

ENV_OUT_VAR = "PHISTEP_OUT"

__all__ = ["main"]


class CliError(Exception):
    """A user-facing CLI failure carrying its exit code."""

    def __init__(self, message: str, code: int = 2):
        super().__init__(message)
        self.code = code


def _default_out() -> Path:
    return Path(os.environ.get(ENV_OUT_VAR, "phistep_out"))


def _load_manifest_file(path) -> dict:
    """JSON with optional full-line # comments."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read manifest {path}: {exc}") from exc
    body = "\n".join(
        line for line in text.splitlines() if not line.lstrip().startswith("#")
    )
    try:
        manifest = json.loads(body)
    except json.JSONDecodeError as exc:
        raise CliError(f"manifest {path} is not valid JSON: {exc}") from exc
    if not isinstance(manifest, dict):
        raise CliError(f"manifest {path} must hold a JSON object")
    return manifest


def _resolve_problem(name: str):
    try:
        return get_problem(name)
    except KeyError as exc:
        raise CliError(str(exc.args[0])) from exc


def _resolve_scheme(name: str) -> str:
    try:
        return get_scheme(name).name
    except KeyError as exc:
        raise CliError(str(exc.args[0])) from exc


def _parse_floats(text: str, what: str) -> List[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise CliError(f"bad {what} {text!r}: {exc}") from exc


def _registry_key(problem) -> str:
    return problem.name if problem.dims == 1 else f"{problem.name}{problem.dims}"


# ---------------------------------------------------------------------------
# list


def cmd_list(args: argparse.Namespace) -> int:
    schemes = list_schemes()
    print(f"schemes ({len(schemes)}): name  family  order  stages  steps")
    for info in schemes:
        print(f"  {info.display}  {info.family}  {info.order}  {info.stages}  {info.steps}")
    names = problem_names()
    print(f"problems ({len(names)}): name  dims  stiff linear part")
    for key in names:
        problem = get_problem(key)
        print(f"  {key}  {problem.dims}D  {problem.label}")
    return 0


# ---------------------------------------------------------------------------
# run

# Problems with a closed-form solution valid at any time, for --compare-analytic.
_ANALYTIC = {
    "nls": lambda grid, t: nls_breather(NLS_A, NLS_B, t, grid.meshgrid()[0]),
}


def cmd_run(args: argparse.Namespace) -> int:
    manifest = _load_manifest_file(args.manifest) if args.manifest else {}

    def setting(flag, key, default=None):
        return flag if flag is not None else manifest.get(key, default)

    problem_name = setting(args.problem, "problem")
    if not problem_name:
        raise CliError("run needs a problem name (argument or manifest)")
    problem = _resolve_problem(problem_name)
    scheme = _resolve_scheme(setting(args.scheme, "scheme", "etdrk4"))
    h = setting(args.h, "h")
    if h is None:
        raise CliError("run needs a step size: pass --h or a manifest with one")
    h = float(h)
    # Single runs default to the paper-scale registry values; --desk shrinks.
    desk = bool(setting(args.desk or None, "desk", False))
    size = setting(args.size, "size")
    grid = default_grid(problem, paper_scale=not desk, size=size)
    T = float(setting(args.T, "T", problem.desk_T if desk else problem.T))
    points = setting(args.contour, "contour_points")
    contour = None if points is None else ContourSpec(points=int(points))
    snapshots = setting(args.snapshots, "snapshots") or []
    if isinstance(snapshots, str):
        snapshots = _parse_floats(snapshots, "snapshot times")
    compare = bool(setting(args.compare_analytic or None, "compare_analytic", False))
    delta0 = bool(setting(args.reproduce_printed_delta0 or None,
                          "reproduce_printed_delta0", False))
    if compare and problem.name not in _ANALYTIC:
        raise CliError(
            f"--compare-analytic has no closed-form solution registered for "
            f"{_registry_key(problem)}; available: {', '.join(sorted(_ANALYTIC))}"
        )

    key = _registry_key(problem)
    system = discretize(problem, grid)
    print(f"problem {key} ({problem.dims}D), grid {'x'.join(map(str, grid.sizes))}, "
          f"T {T:g}, scheme {scheme}, h {h:g}")
    try:
        result = integrate(system, scheme, h, T, contour=contour,
                           snapshot_times=snapshots, delta0_state=delta0)
    except UnstableError as exc:
        when = "unknown time" if exc.time is None else f"t={exc.time:.6g}"
        print(f"unstable at {when}: {exc}", file=sys.stderr)
        return 3

    out = Path(args.out) if args.out else _default_out()
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{key}_{scheme}"
    final_path = save_field(
        out / f"{stem}_final.txt",
        to_values(result.u, grid, real=problem.real),
        grid, T, problem=key,
    )
    written = [final_path]
    for snap in result.snapshots:
        written.append(save_field(
            out / f"{stem}_t{snap.time:.6g}.txt",
            to_values(snap.coeffs, grid, real=problem.real),
            grid, snap.time, problem=key,
        ))
    echo = {
        "problem": key, "scheme": scheme, "h": result.h, "T": T,
        "size": grid.sizes[0], "contour_points": points, "desk": desk,
        "snapshots": list(snapshots), "compare_analytic": compare,
        "reproduce_printed_delta0": delta0,
    }
    echo_path = out / f"{stem}_run.json"
    echo_path.write_text(json.dumps(echo, indent=2, sort_keys=True) + "\n",
                         encoding="utf-8")
    written.append(echo_path)

    print(f"steps {result.steps} (h snapped to {result.h:.6g})")
    print(f"ffts {result.fft_count} stepping, {result.fft_total} total")
    print(f"stepping seconds {result.seconds:.6g}")
    if not result.starter_converged:
        print("warning: multistep starter did not converge", file=sys.stderr)
    if compare:
        exact = _ANALYTIC[problem.name](grid, T)
        numeric = to_values(result.u, grid, real=problem.real)[0]
        print(f"error vs analytic solution {rel_l2_error(numeric, exact):.6e}")
    for path in written:
        print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------
# bench


def cmd_bench(args: argparse.Namespace) -> int:
    jobs = args.jobs
    if args.manifest:
        manifest = _load_manifest_file(args.manifest)
        try:
            plan = plan_from_manifest(manifest)
        except (KeyError, ValueError) as exc:
            raise CliError(f"bad bench manifest: {exc}") from exc
    else:
        if not args.problem:
            raise CliError("bench needs a problem name (argument or --manifest)")
        problem = _resolve_problem(args.problem)
        schemes = None
        if args.schemes:
            schemes = [_resolve_scheme(s) for s in args.schemes.split(",") if s.strip()]
        ladder = _parse_floats(args.ladder, "ladder") if args.ladder else None
        points = args.contour
        try:
            plan = make_plan(
                _registry_key(problem), schemes,
                paper_scale=args.paper_scale, size=args.size, T=args.T,
                ladder=ladder, count=args.count,
                contour=None if points is None else ContourSpec(points=points),
            )
        except (KeyError, ValueError) as exc:
            raise CliError(f"bad bench settings: {exc}") from exc

    out = Path(args.out) if args.out else (plan.out_dir or _default_out())
    key = _registry_key(plan.problem)
    try:
        records = run_sweep(plan, jobs=jobs, repetitions=args.reps)
    except UnstableError as exc:
        when = "unknown time" if exc.time is None else f"t={exc.time:.6g}"
        print(f"unstable at {when}: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        raise CliError(f"bad bench settings: {exc}") from exc

    paths = export(
        records, out, basename=key, title=key,
        manifest=plan_to_manifest(plan, jobs=jobs, repetitions=args.reps),
    )
    print(f"sweep {key}: {len(plan.schemes)} schemes x {len(plan.ladder)} steps, T {plan.T:g}")
    for scheme in plan.schemes:
        recs = [r for r in records if r.scheme == scheme]
        stable = [r for r in recs if r.stable]
        line = f"  {scheme}: {len(stable)}/{len(recs)} stable"
        if stable:
            line += f", best error {min(r.error for r in stable):.3e}"
        try:
            line += f", order ~ {estimate_order(recs):.2f}"
        except (NoDataError, ValueError):
            line += ", order n/a"
        print(line)
    for kind in ("csv", "svg", "manifest"):
        print(f"wrote {paths[kind]}")
    return 0


# ---------------------------------------------------------------------------
# order


def cmd_order(args: argparse.Namespace) -> int:
    if args.csv:
        records = read_records(args.csv)
        by_scheme: dict = {}
        for record in records:
            by_scheme.setdefault(record.scheme, []).append(record)
        print("scheme  estimated order")
        for scheme, recs in by_scheme.items():
            try:
                print(f"  {scheme}  {estimate_order(recs):.2f}")
            except NoDataError as exc:
                print(f"  {scheme}  n/a ({exc})")
        return 0
    names = ([_resolve_scheme(s) for s in args.schemes.split(",") if s.strip()]
             if args.schemes else sorted(REGISTRY))
    print("scheme  declared  measured  verdict")
    all_ok = True
    for name in names:
        info = get_scheme(name)
        measured = empirical_order(name)
        tol = 0.4 if info.order >= 6 else 0.3
        ok = abs(measured - info.order) <= tol
        all_ok &= ok
        print(f"  {name}  {info.order}  {measured:.2f}  {'ok' if ok else 'OFF'}")
    return 0 if all_ok else 1


# ---------------------------------------------------------------------------
# selftest


def _selftest_phi() -> tuple:
    grid = np.concatenate([
        -np.logspace(-6, 6, 25),
        1j * np.logspace(-4, 4, 13),
        -1j * np.logspace(-4, 4, 13),
    ])
    worst = 0.0
    for index in range(10):
        via_contour = phi_contour(index, grid)
        for z, approx in zip(grid, via_contour):
            exact = phi_scalar(index, complex(z))
            scale = max(abs(exact), 1e-300)
            worst = max(worst, abs(approx - exact) / scale)
    return worst <= 1e-12, f"max rel {worst:.2e} over l<=9 grid"


def _selftest_reductions() -> tuple:
    F = Fraction
    checks = []
    ab4 = get_scheme("abnorsett4").tableau()
    got = [ab4.B[0].at_zero()] + [v.at_zero() for v in ab4.V]
    checks.append(got == [F(55, 24), F(-59, 24), F(37, 24), F(-9, 24)])
    rk4 = get_scheme("etdrk4").tableau()
    checks.append([b.at_zero() for b in rk4.B] == [F(1, 6), F(1, 3), F(1, 3), F(1, 6)])
    consistent = 0
    for info in list_schemes():
        if info.engine != "tableau":
            continue
        t = info.tableau()
        total = sum((e.at_zero() for e in (*t.B, *t.V)), F(0))
        checks.append(total == 1)
        consistent += 1
    return all(checks), f"AB4 + RK4 literals, {consistent} tableaux consistent at z=0"


def _selftest_linear() -> tuple:
    rng = np.random.default_rng(2024)
    n = 24
    lam = -(10.0 ** rng.uniform(-2, 3, n)) + 1j * rng.uniform(-1e3, 1e3, n)
    lam[:4] = [-1e3, -1.0, 1e3j, -1e-2 + 10j]
    u0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    system = _ProbeSystem(lam=lam, u0=u0, func=np.zeros_like, name="selftest-linear")
    T, steps = 1.0, 100
    exact = np.exp(T * lam) * u0
    scale = float(np.linalg.norm(exact))
    worst, worst_name = 0.0, ""
    for info in list_schemes():
        result = integrate(system, info.name, T / steps, T)
        err = float(np.linalg.norm(result.u - exact)) / scale
        if err > worst:
            worst, worst_name = err, info.name
    return worst <= 1e-12, f"worst rel {worst:.2e} ({worst_name}) over {steps} steps"


def _selftest_orders() -> tuple:
    worst, worst_name, ok = 0.0, "", True
    for info in list_schemes():
        measured = empirical_order(info.name)
        gap = abs(measured - info.order)
        tol = 0.4 if info.order >= 6 else 0.3
        ok &= gap <= tol
        if gap > worst:
            worst, worst_name = gap, info.name
    return ok, f"worst |measured - declared| {worst:.2f} ({worst_name})"


def cmd_selftest(args: argparse.Namespace) -> int:
    stages = [
        ("phi kernels (contour vs series)", _selftest_phi),
        ("classical reductions at z=0", _selftest_reductions),
        ("linear exactness (N == 0)", _selftest_linear),
        ("order certification (scalar probe)", _selftest_orders),
    ]
    all_ok = True
    width = max(len(name) for name, _ in stages)
    for name, stage in stages:
        passed, detail = stage()
        all_ok &= passed
        print(f"{name:<{width}}  {'PASS' if passed else 'FAIL'}  {detail}")
    print(f"selftest: {'PASS' if all_ok else 'FAIL'}")
    return 0 if all_ok else 1


# ---------------------------------------------------------------------------
# parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phistep",
        description="Exponential integrators for periodic semilinear stiff "
                    "PDEs, with a benchmark harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_list = sub.add_parser("list", help="show the scheme and problem catalogs")
    p_list.set_defaults(func=cmd_list)

    p_run = sub.add_parser("run", help="integrate one problem and dump fields")
    p_run.add_argument("problem", nargs="?", help="problem registry name (e.g. ks)")
    p_run.add_argument("--scheme", help="scheme registry name (default etdrk4)")
    p_run.add_argument("--h", type=float, help="time step")
    p_run.add_argument("--T", type=float, help="horizon (default: registry)")
    p_run.add_argument("--size", type=int, help="grid points per axis")
    p_run.add_argument("--desk", action="store_true",
                       help="use the reduced desk-scale grid and horizon")
    p_run.add_argument("--contour", type=int, help="contour quadrature points")
    p_run.add_argument("--snapshots", help="comma-separated times to dump")
    p_run.add_argument("--compare-analytic", action="store_true",
                       help="print the error against a closed-form solution")
    p_run.add_argument("--reproduce-printed-delta0", action="store_true",
                       help="feed the starter's printed form of the first "
                            "finite-difference column")
    p_run.add_argument("--out", help="output directory")
    p_run.add_argument("--manifest", help="JSON manifest (# comments allowed)")
    p_run.set_defaults(func=cmd_run)

    p_bench = sub.add_parser("bench", help="sweep schemes over step sizes")
    p_bench.add_argument("problem", nargs="?", help="problem registry name")
    p_bench.add_argument("--schemes", help="comma-separated scheme names")
    p_bench.add_argument("--desk", action="store_true",
                         help="desk-scale settings (the default)")
    p_bench.add_argument("--paper-scale", action="store_true",
                         help="full-resolution grids and horizons")
    p_bench.add_argument("--ladder", help="comma-separated step sizes, descending")
    p_bench.add_argument("--count", type=int, default=7,
                         help="rungs in the default ladder T/2^4 .. T/2^(3+count)")
    p_bench.add_argument("--T", type=float, help="horizon override")
    p_bench.add_argument("--size", type=int, help="grid points per axis")
    p_bench.add_argument("--contour", type=int, help="contour quadrature points")
    p_bench.add_argument("--jobs", type=int, help="max parallel workers")
    p_bench.add_argument("--reps", type=int, default=3,
                         help="timing repetitions per stable point")
    p_bench.add_argument("--out", help="output directory")
    p_bench.add_argument("--manifest", help="rerun from a manifest echo")
    p_bench.set_defaults(func=cmd_bench)

    p_order = sub.add_parser("order", help="estimate convergence orders")
    p_order.add_argument("--schemes", help="comma-separated scheme names (default all)")
    p_order.add_argument("--csv", help="estimate from an exported sweep CSV instead")
    p_order.set_defaults(func=cmd_order)

    p_self = sub.add_parser("selftest", help="run numerical kernel checks")
    p_self.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "bench" and args.desk and args.paper_scale:
        print("--desk and --paper-scale are mutually exclusive", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except CliError as exc:
        print(str(exc), file=sys.stderr)
        return exc.code
    except UnstableError as exc:
        when = "unknown time" if exc.time is None else f"t={exc.time:.6g}"
        print(f"unstable at {when}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
