"""Exponential integrators for periodic semilinear stiff PDEs.

The package discretizes u_t = L u + N(u) on periodic boxes with a Fourier
spectral method and advances the Fourier coefficients with a catalog of
exponential time integrators (ETD Runge-Kutta, ETD multistep,
predictor-corrector and Lawson-type schemes), evaluating the phi-function
coefficients stably via contour integrals.  A benchmarking harness sweeps
time steps, measures accuracy against a fine reference solution, and
renders cost/accuracy comparisons.
"""
from __future__ import annotations

from .errors import NoDataError, PhistepError, TableauFileError, UnstableError
from .phifun import (
    ContourSpec,
    PhiExpr,
    PhiTerm,
    const_term,
    eval_phi_expr,
    exp_term,
    gamma_contour,
    gamma_scalar,
    phi,
    phi_contour,
    phi_scalar,
    psi,
)
from .tableau import (
    REGISTRY,
    SchemeInfo,
    Tableau,
    build_abnorsett,
    build_pec,
    build_pecec,
    complete_summation,
    empirical_order,
    etd_ab_weights,
    etd_am_weights,
    etd_euler,
    etdrk2,
    etdrk4,
    get_scheme,
    lawson4,
    ablawson4,
    list_schemes,
    load_tableau_file,
)
from .spectral import (
    Grid,
    NonlinearOp,
    apply_nonlinear,
    diff_symbol,
    fft_counter,
    install_fft_counter,
    laplacian_symbol,
    remove_fft_counter,
    to_coeffs,
    to_values,
    wavenumbers,
)
from .problems import (
    DiscreteSystem,
    Problem,
    default_grid,
    discretize,
    get_problem,
    kdv_phase_shifts,
    kdv_soliton,
    list_problems,
    nls_breather,
    problem_names,
)
from .integrator import (
    GenLawsonScheme,
    IntegrationResult,
    PrecomputedScheme,
    ScalarProbe,
    SimState,
    Snapshot,
    StarterResult,
    gen_lawson_step,
    integrate,
    precompute,
    precompute_gen_lawson,
    prepare_scheme,
    run_scalar_probe,
    start_multistep,
    step,
)
from .bench import (
    SweepPlan,
    SweepRecord,
    estimate_order,
    export,
    geometric_ladder,
    load_field,
    make_plan,
    plan_from_manifest,
    plan_to_manifest,
    read_records,
    reference_solution,
    rel_l2_error,
    run_sweep,
    save_field,
)

__version__ = "0.1.0"

__all__ = [
    "PhistepError",
    "UnstableError",
    "TableauFileError",
    "NoDataError",
    "ContourSpec",
    "PhiExpr",
    "PhiTerm",
    "phi",
    "psi",
    "exp_term",
    "const_term",
    "phi_scalar",
    "gamma_scalar",
    "phi_contour",
    "gamma_contour",
    "eval_phi_expr",
    "Tableau",
    "SchemeInfo",
    "REGISTRY",
    "get_scheme",
    "list_schemes",
    "etd_euler",
    "etdrk2",
    "etdrk4",
    "build_abnorsett",
    "build_pec",
    "build_pecec",
    "lawson4",
    "ablawson4",
    "etd_ab_weights",
    "etd_am_weights",
    "complete_summation",
    "empirical_order",
    "load_tableau_file",
    "Grid",
    "NonlinearOp",
    "wavenumbers",
    "diff_symbol",
    "laplacian_symbol",
    "to_coeffs",
    "to_values",
    "apply_nonlinear",
    "install_fft_counter",
    "remove_fft_counter",
    "fft_counter",
    "Problem",
    "DiscreteSystem",
    "get_problem",
    "list_problems",
    "problem_names",
    "default_grid",
    "discretize",
    "kdv_soliton",
    "kdv_phase_shifts",
    "nls_breather",
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
    "SweepPlan",
    "SweepRecord",
    "geometric_ladder",
    "make_plan",
    "reference_solution",
    "rel_l2_error",
    "run_sweep",
    "estimate_order",
    "export",
    "read_records",
    "save_field",
    "load_field",
    "plan_to_manifest",
    "plan_from_manifest",
    "__version__",
]
