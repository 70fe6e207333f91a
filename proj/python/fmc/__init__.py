"""Minkowski mean-curvature inclusion solver.

Fields are numpy vectors of nodal values; meshes come from the builders
below or from a mesh file.
"""

from ._fmc import (  # noqa: F401
    ConfigError,
    Mesh,
    MeshError,
    MarginViolation,
    NonConvergence,
    Nonlinearity,
    SolveResult,
    analytic_radial,
    bounds,
    brute_force_minimize,
    disk_mesh,
    feasible,
    inclusion_residual,
    interval_mesh,
    max_element_gradient,
    psi,
    psi_gradient,
    read_mesh,
    rectangle_mesh,
    run_config,
    script_f,
    solve_inclusion,
    solve_prescribed,
    stationarity_measure,
    total_energy,
    variational_inequality_check,
    verify_solution,
)


def catalog(name, **params):
    """Catalog right-hand side, e.g. catalog("step", a=1, b=-1, s0=0)."""
    return Nonlinearity.catalog(name, {k: float(v) for k, v in params.items()})
