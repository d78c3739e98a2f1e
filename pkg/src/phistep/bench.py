"""Benchmark harness: accuracy/work sweeps over schemes and step sizes.

A sweep integrates one discretized problem with several schemes over a
descending ladder of step sizes, measures each run's relative L2 error
against a cached high-order reference solution, times the stepping loop,
and exports the records as CSV, a two-panel log-log SVG, and a JSON
manifest echo.  Error measurement runs in parallel across sweep points;
timing repetitions run sequentially so no co-scheduled work pollutes
them.  A numerically unstable point is recorded with ``stable=False``
and never aborts the sweep — only a failed reference solve does.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import NoDataError, UnstableError
from .integrator import integrate
from .phifun import ContourSpec
from .problems import Problem, default_grid, discretize, get_problem
from .spectral import Grid, to_values
from .svgplot import Panel, two_panel_svg
from .tableau import get_scheme

__all__ = [
    "CSV_HEADER",
    "FIELD_FORMAT_VERSION",
    "FLOOR_FACTOR",
    "REFERENCE_SCHEME",
    "SweepPlan",
    "SweepRecord",
    "clear_reference_cache",
    "estimate_order",
    "export",
    "geometric_ladder",
    "load_field",
    "make_plan",
    "plan_from_manifest",
    "plan_to_manifest",
    "read_records",
    "reference_solution",
    "rel_l2_error",
    "run_sweep",
    "save_field",
]

#: Scheme used for reference solves: the highest-order method in the catalog.
REFERENCE_SCHEME = "pecec736"

#: Points with error <= FLOOR_FACTOR * (smallest error) sit on the error
#: floor of the reference solution and are excluded from order fits.
FLOOR_FACTOR = 100.0

CSV_HEADER = "scheme,h,h_over_T,error,seconds,stable,starter_converged"

_DEFAULT_SCHEMES = ("etdrk4", "lawson4", "abnorsett4", "pecec534")


# ---------------------------------------------------------------------------
# records and plans


@dataclass(frozen=True)
class SweepRecord:
    """One (scheme, step size) sweep point.

    ``error`` and ``seconds`` are present exactly when the run was
    stable; an unstable point keeps its place in the ladder with both
    set to None.  ``h`` is the snapped step actually used (T divided by
    a whole number of steps).
    """

    scheme: str
    h: float
    h_over_T: float
    error: Optional[float]
    seconds: Optional[float]
    stable: bool
    starter_converged: bool

    def __post_init__(self) -> None:
        if self.stable != (self.error is not None):
            raise ValueError("error must be present exactly for stable records")
        if self.stable != (self.seconds is not None):
            raise ValueError("seconds must be present exactly for stable records")


def geometric_ladder(h_max: float, h_min: float, count: int) -> Tuple[float, ...]:
    """A descending geometric ladder of ``count`` step sizes from h_max to h_min."""
    if count < 1:
        raise ValueError(f"ladder needs at least one rung, got {count}")
    if not 0 < h_min <= h_max:
        raise ValueError(f"need 0 < h_min <= h_max, got {h_min}, {h_max}")
    if count == 1:
        if h_min != h_max:
            raise ValueError("a one-rung ladder needs h_min == h_max")
        return (h_max,)
    ratio = h_min / h_max
    return tuple(h_max * ratio ** (k / (count - 1)) for k in range(count))


@dataclass(frozen=True)
class SweepPlan:
    """Everything a sweep needs: problem, grid, schemes, ladder, horizon.

    The ladder must be strictly descending and positive; scheme names
    are validated against the catalog on construction.
    """

    problem: Problem
    grid: Grid
    schemes: Tuple[str, ...]
    ladder: Tuple[float, ...]
    T: float
    contour: Optional[ContourSpec] = None
    out_dir: Optional[Path] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "schemes", tuple(str(s).lower() for s in self.schemes))
        object.__setattr__(self, "ladder", tuple(float(h) for h in self.ladder))
        if self.out_dir is not None:
            object.__setattr__(self, "out_dir", Path(self.out_dir))
        if not self.schemes:
            raise ValueError("a sweep needs at least one scheme")
        for name in self.schemes:
            get_scheme(name)  # raises KeyError naming an unknown scheme
        if not self.ladder:
            raise ValueError("a sweep needs at least one step size")
        if self.ladder[-1] <= 0:
            raise ValueError(f"step sizes must be positive, got {self.ladder[-1]}")
        if any(a <= b for a, b in zip(self.ladder, self.ladder[1:])):
            raise ValueError(f"ladder must be strictly descending, got {self.ladder}")
        if not self.T > 0:
            raise ValueError(f"horizon must be positive, got {self.T}")


def make_plan(
    problem_name: str,
    schemes: Optional[Sequence[str]] = None,
    *,
    paper_scale: bool = False,
    size: Optional[int] = None,
    T: Optional[float] = None,
    ladder: Optional[Sequence[float]] = None,
    count: int = 7,
    contour: Optional[ContourSpec] = None,
    out_dir: Optional[Path] = None,
) -> SweepPlan:
    """Build a SweepPlan from a problem's registry defaults.

    The default ladder is h = T/2^k for k = 4 .. 3 + count, matching the
    resolution range where the catalog schemes separate; at desk scale
    the horizon is the problem's shortened one.
    """
    problem = get_problem(problem_name)
    grid = default_grid(problem, paper_scale=paper_scale, size=size)
    horizon = T if T is not None else (problem.T if paper_scale else problem.desk_T)
    if ladder is None:
        rungs = tuple(horizon * 2.0 ** (-k) for k in range(4, 4 + count))
    else:
        rungs = tuple(ladder)
    return SweepPlan(
        problem=problem,
        grid=grid,
        schemes=tuple(schemes) if schemes else _DEFAULT_SCHEMES,
        ladder=rungs,
        T=horizon,
        contour=contour,
        out_dir=out_dir,
    )


# ---------------------------------------------------------------------------
# reference solutions and the error metric

_REFERENCE_CACHE: Dict[tuple, np.ndarray] = {}
_REFERENCE_LOCK = threading.Lock()


def clear_reference_cache() -> None:
    """Drop all cached reference solutions (mainly for tests)."""
    with _REFERENCE_LOCK:
        _REFERENCE_CACHE.clear()


def _system_key(system) -> tuple:
    grid = getattr(system, "grid", None)
    grid_key = None if grid is None else (grid.sizes, grid.domain)
    lam = np.ascontiguousarray(np.asarray(system.lam, dtype=complex))
    u0 = np.ascontiguousarray(np.asarray(system.u0, dtype=complex))
    digest = hashlib.sha1(lam.tobytes() + u0.tobytes()).hexdigest()
    return (getattr(system, "name", type(system).__name__), grid_key, digest)


def reference_solution(system, T: float, h_min: float, *, contour: Optional[ContourSpec] = None) -> np.ndarray:
    """Final coefficients of a reference solve at half the smallest sweep step.

    Uses the highest-order catalog scheme at h_min/2 and caches the
    result per (system, T, h_min): a second call with the same key
    returns the identical (read-only) array without re-solving.  An
    unstable reference raises UnstableError — the caller's sweep cannot
    proceed without a trusted baseline.
    """
    if not h_min > 0:
        raise ValueError(f"h_min must be positive, got {h_min}")
    key = (_system_key(system), float(T), float(h_min),
           None if contour is None else (contour.points, contour.radius))
    with _REFERENCE_LOCK:
        cached = _REFERENCE_CACHE.get(key)
    if cached is not None:
        return cached
    try:
        result = integrate(system, REFERENCE_SCHEME, h_min / 2.0, T, contour=contour)
    except UnstableError as exc:
        raise UnstableError(
            f"reference solve ({REFERENCE_SCHEME} at h={h_min / 2.0:g}) for "
            f"{getattr(system, 'name', 'system')} is unstable at t={exc.time}: "
            "the sweep has no trusted baseline",
            time=exc.time,
            step=exc.step,
        ) from exc
    u = np.array(result.u, copy=True)
    u.setflags(write=False)
    with _REFERENCE_LOCK:
        return _REFERENCE_CACHE.setdefault(key, u)


def rel_l2_error(u: np.ndarray, reference: np.ndarray) -> float:
    """Relative discrete L2 distance between two fields of equal shape.

    Multi-component fields are concatenated (all components enter one
    norm).  A zero-norm reference leaves the relative error undefined
    and raises NoDataError.
    """
    u = np.asarray(u)
    reference = np.asarray(reference)
    if u.shape != reference.shape:
        raise ValueError(f"shape mismatch: {u.shape} vs {reference.shape}")
    denom = float(np.linalg.norm(reference.ravel()))
    if denom == 0.0:
        raise NoDataError("reference field has zero norm; relative error is undefined")
    return float(np.linalg.norm((u - reference).ravel()) / denom)


# ---------------------------------------------------------------------------
# running sweeps


def _snapped_h(h: float, T: float) -> float:
    return T / max(1, math.ceil(T / h - 1e-9))


def _state_span(name: str) -> int:
    info = get_scheme(name)
    return info.steps + 1 if info.engine == "genlawson" else info.steps


def _validate_step_counts(plan: SweepPlan) -> None:
    nsteps_max = max(1, math.ceil(plan.T / plan.ladder[0] - 1e-9))
    for name in plan.schemes:
        need = _state_span(name) - 1
        if nsteps_max < need:
            raise ValueError(
                f"{name} needs at least {need} steps but h={plan.ladder[0]:g} "
                f"gives only {nsteps_max} over T={plan.T:g}"
            )


def run_sweep(
    plan: SweepPlan,
    *,
    jobs: Optional[int] = None,
    repetitions: int = 3,
) -> List[SweepRecord]:
    """Run the full sweep and return records in plan order (scheme-major).

    Phase one solves every (scheme, h) point — in parallel when jobs
    permits — and measures errors against the shared reference solution.
    Phase two re-runs each stable point ``repetitions`` times
    sequentially and records the minimum stepping-loop time.  Unstable
    points are recorded with stable=False and otherwise skipped.
    """
    if repetitions < 1:
        raise ValueError(f"need at least one timing repetition, got {repetitions}")
    _validate_step_counts(plan)
    system = discretize(plan.problem, plan.grid)
    reference = reference_solution(system, plan.T, plan.ladder[-1], contour=plan.contour)
    ref_values = to_values(reference, system.grid, real=system.real)

    points = [(scheme, h) for scheme in plan.schemes for h in plan.ladder]

    def solve(point):
        scheme, h = point
        h_snap = _snapped_h(h, plan.T)
        try:
            result = integrate(system, scheme, h, plan.T, contour=plan.contour)
        except UnstableError:
            return SweepRecord(
                scheme=scheme, h=h_snap, h_over_T=h_snap / plan.T,
                error=None, seconds=None, stable=False, starter_converged=True,
            )
        error = rel_l2_error(to_values(result.u, system.grid, real=system.real), ref_values)
        if not math.isfinite(error):
            return SweepRecord(
                scheme=scheme, h=result.h, h_over_T=result.h / plan.T,
                error=None, seconds=None, stable=False,
                starter_converged=result.starter_converged,
            )
        return SweepRecord(
            scheme=scheme, h=result.h, h_over_T=result.h / plan.T,
            error=error, seconds=result.seconds, stable=True,
            starter_converged=result.starter_converged,
        )

    if jobs is not None and jobs < 1:
        raise ValueError(f"jobs must be positive, got {jobs}")
    if jobs == 1 or len(points) == 1:
        records = [solve(p) for p in points]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(solve, points))

    # Exclusive timing repetitions: one run at a time, keep the minimum.
    timed: List[SweepRecord] = []
    for record in records:
        if not record.stable:
            timed.append(record)
            continue
        best = min(
            integrate(system, record.scheme, record.h, plan.T, contour=plan.contour).seconds
            for _ in range(repetitions)
        )
        timed.append(replace(record, seconds=best))
    return timed


# ---------------------------------------------------------------------------
# order estimation


def estimate_order(records: Sequence[SweepRecord]) -> float:
    """Least-squares convergence order of one scheme's sweep records.

    Fits the slope of log(error) against log(h) over the stable points
    sitting above the error floor (error > FLOOR_FACTOR times the
    smallest stable error, which screens out reference-limited points).
    Raises NoDataError when fewer than three points qualify.
    """
    names = {r.scheme for r in records}
    if len(names) > 1:
        raise ValueError(f"records mix schemes {sorted(names)}; estimate one at a time")
    stable = [r for r in records if r.stable and r.error is not None and r.error > 0]
    if not stable:
        raise NoDataError("no stable points with positive error")
    floor = FLOOR_FACTOR * min(r.error for r in stable)
    pts = [(r.h, r.error) for r in stable if r.error > floor]
    if len(pts) < 3:
        raise NoDataError(
            f"only {len(pts)} stable point(s) above the error floor; need at least 3"
        )
    logh = np.log([h for h, _ in pts])
    loge = np.log([e for _, e in pts])
    slope = np.polyfit(logh, loge, 1)[0]
    return float(slope)


# ---------------------------------------------------------------------------
# export and import


def _format_field(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_optional_float(text: str) -> Optional[float]:
    return None if text == "" else float(text)


def _parse_bool(text: str) -> bool:
    if text == "true":
        return True
    if text == "false":
        return False
    raise ValueError(f"expected 'true' or 'false', got {text!r}")


def export(
    records: Sequence[SweepRecord],
    out_dir,
    *,
    basename: str = "sweep",
    title: str = "",
    manifest: Optional[dict] = None,
) -> Dict[str, Path]:
    """Write CSV, two-panel SVG, and JSON manifest files for a sweep.

    The CSV holds one row per record with floats in shortest
    round-trip form (empty fields for an unstable point's error and
    seconds).  The SVG's left panel plots error against h/T and its
    right panel error against stepping seconds, one curve per scheme
    with line gaps at unstable points.  The manifest echo (pretty JSON)
    records whatever dictionary the caller passes, so a run can be
    reproduced from its output directory.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "csv": out / f"{basename}.csv",
        "svg": out / f"{basename}.svg",
        "manifest": out / f"{basename}.json",
    }

    with paths["csv"].open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER.split(","))
        for r in records:
            writer.writerow([
                r.scheme,
                _format_field(r.h),
                _format_field(r.h_over_T),
                _format_field(r.error),
                _format_field(r.seconds),
                _format_field(r.stable),
                _format_field(r.starter_converged),
            ])

    by_scheme: Dict[str, List[SweepRecord]] = {}
    for r in records:
        by_scheme.setdefault(r.scheme, []).append(r)
    accuracy = {
        scheme: [(r.h_over_T, r.error) if r.stable else None for r in recs]
        for scheme, recs in by_scheme.items()
    }
    work = {
        scheme: [(r.seconds, r.error) if r.stable else None for r in recs]
        for scheme, recs in by_scheme.items()
    }
    left = Panel(title=f"{title} accuracy".strip(), xlabel="h / T",
                 ylabel="relative L2 error", curves=accuracy)
    right = Panel(title=f"{title} work".strip(), xlabel="stepping seconds",
                  ylabel="relative L2 error", curves=work)
    two_panel_svg(left, right, paths["svg"])

    payload = dict(manifest) if manifest is not None else {}
    payload.setdefault("records_csv", paths["csv"].name)
    paths["manifest"].write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return paths


def read_records(csv_path) -> List[SweepRecord]:
    """Parse a sweep CSV written by ``export`` back into records."""
    path = Path(csv_path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path} is empty; expected header {CSV_HEADER!r}") from None
        if header != CSV_HEADER.split(","):
            raise ValueError(f"{path} has header {header}; expected {CSV_HEADER!r}")
        records = []
        for row in reader:
            if len(row) != 7:
                raise ValueError(f"{path}: expected 7 fields, got {row}")
            records.append(SweepRecord(
                scheme=row[0],
                h=float(row[1]),
                h_over_T=float(row[2]),
                error=_parse_optional_float(row[3]),
                seconds=_parse_optional_float(row[4]),
                stable=_parse_bool(row[5]),
                starter_converged=_parse_bool(row[6]),
            ))
    return records


# ---------------------------------------------------------------------------
# field snapshots

#: Bump when the snapshot layout changes; readers refuse unknown versions.
FIELD_FORMAT_VERSION = 1


def save_field(path, values: np.ndarray, grid: Grid, time: float, *, problem: str = "") -> Path:
    """Dump one field (grid values) as text with a version-tagged header.

    Header lines start with ``#`` and record the format version, grid
    sizes and intervals, simulation time, component count, and whether
    entries are real or complex; the flattened values follow one per
    line in shortest round-trip decimal form (complex as two columns).
    """
    values = np.asarray(values)
    if values.shape[-grid.dims:] != grid.shape:
        raise ValueError(f"field shape {values.shape} does not end in {grid.shape}")
    if values.ndim == grid.dims:
        values = values[np.newaxis]
    if values.ndim != grid.dims + 1:
        raise ValueError(f"expected (components, *grid) layout, got {values.shape}")
    is_complex = np.iscomplexobj(values)
    lines = [
        f"# phistep-field {FIELD_FORMAT_VERSION}",
        f"# problem {problem}",
        f"# sizes {' '.join(str(n) for n in grid.sizes)}",
        "# domain " + " ".join(repr(float(e)) for a_b in grid.domain for e in a_b),
        f"# time {float(time)!r}",
        f"# components {values.shape[0]}",
        f"# kind {'complex' if is_complex else 'real'}",
    ]
    if is_complex:
        lines.extend(f"{complex(z).real!r} {complex(z).imag!r}" for z in values.ravel())
    else:
        lines.extend(repr(float(v)) for v in values.ravel())
    out = Path(path)
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return out


def load_field(path):
    """Read a field written by save_field: (values, grid, time, problem).

    Values come back with an explicit leading component axis.  Raises
    ValueError on unknown format versions or malformed headers.
    """
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text or not text[0].startswith("# phistep-field "):
        raise ValueError(f"{path} is not a phistep field dump")
    version = int(text[0].split()[-1])
    if version != FIELD_FORMAT_VERSION:
        raise ValueError(f"{path} has format version {version}; this reader handles {FIELD_FORMAT_VERSION}")
    header = {}
    body_start = 0
    for idx, line in enumerate(text):
        if not line.startswith("#"):
            body_start = idx
            break
        key, _, value = line[1:].strip().partition(" ")
        header[key] = value
        body_start = idx + 1
    try:
        sizes = tuple(int(n) for n in header["sizes"].split())
        flat_domain = [float(e) for e in header["domain"].split()]
        domain = tuple((flat_domain[2 * i], flat_domain[2 * i + 1]) for i in range(len(sizes)))
        time = float(header["time"])
        components = int(header["components"])
        kind = header["kind"]
    except (KeyError, ValueError, IndexError) as exc:
        raise ValueError(f"{path} has a malformed header: {exc}") from exc
    grid = Grid(sizes, domain)
    rows = [line.split() for line in text[body_start:] if line.strip()]
    expected = components * grid.npoints
    if len(rows) != expected:
        raise ValueError(f"{path} holds {len(rows)} values; header promises {expected}")
    if kind == "complex":
        data = np.array([complex(float(r), float(i)) for r, i in rows])
    elif kind == "real":
        data = np.array([float(r[0]) for r in rows])
    else:
        raise ValueError(f"{path} has unknown kind {kind!r}")
    return data.reshape((components, *sizes)), grid, time, header.get("problem", "")


# ---------------------------------------------------------------------------
# manifests


def plan_to_manifest(plan: SweepPlan, **extra) -> dict:
    """A JSON-serializable echo of a plan (plus any extra run flags)."""
    manifest = {
        "problem": plan.problem.name if plan.problem.dims == 1
        else f"{plan.problem.name}{plan.problem.dims}",
        "grid": list(plan.grid.sizes),
        "schemes": list(plan.schemes),
        "ladder": list(plan.ladder),
        "T": plan.T,
        "contour_points": None if plan.contour is None else plan.contour.points,
        "out_dir": None if plan.out_dir is None else str(plan.out_dir),
    }
    manifest.update(extra)
    return manifest


def plan_from_manifest(manifest: dict) -> SweepPlan:
    """Rebuild a SweepPlan from a manifest echo (inverse of plan_to_manifest)."""
    problem = get_problem(manifest["problem"])
    sizes = manifest["grid"]
    if len(set(sizes)) != 1 or len(sizes) != problem.dims:
        raise ValueError(f"grid {sizes} does not match a {problem.dims}D uniform grid")
    grid = Grid.uniform(problem.dims, sizes[0], problem.interval)
    points = manifest.get("contour_points")
    contour = None if points is None else ContourSpec(points=points)
    out_dir = manifest.get("out_dir")
    return SweepPlan(
        problem=problem,
        grid=grid,
        schemes=tuple(manifest["schemes"]),
        ladder=tuple(manifest["ladder"]),
        T=float(manifest["T"]),
        contour=contour,
        out_dir=None if out_dir is None else Path(out_dir),
    )
