"""Soft quantum waveguides: does bending a potential channel bind a state?

The package answers the question two independent ways: a Birman-Schwinger
sufficient condition evaluated by singular quadrature, and a direct sparse
finite-difference eigensolve of the 2D Schrodinger operator.
"""

__version__ = "0.1.0"

from .bsengine import (BentBSMatrix, BentResolution, ExcessResolution,
                       condition_integral, fiber_top_eigenvalue,
                       find_bound_states, on_curve_excess,
                       reconstruct_eigenfunction, straight_bs_check,
                       top_eigenvalue)
from .config import ScenarioConfig, load_config
from .geometry import (CurvatureProfile, FrenetTable, PlanarCurve,
                       reconstruct_curve, squared_distance, strip_coordinates_of,
                       strip_point, turning_angle, validate_assumptions)
from .limits import (delta_coupling, delta_limit_study, dirichlet_threshold,
                     scaled_well)
from .oracle import (BoxGrid, assemble, box_for_scenario,
                     discrete_spectrum_report, lowest_eigenvalues,
                     potential_on_grid)
from .quadrature import (PanelPartition, QuadratureRule, composite_rule,
                         gauss_legendre, macdonald_k0)
from .report import RunReport, emit, report_json
from .runner import run, run_sweep
from .transverse import (GroundState, TransverseWell, flat_bottom_ground_state,
                         neumann_threshold, solve_ground_state,
                         weighted_ground_function)

__all__ = [
    "BentBSMatrix", "BentResolution", "BoxGrid", "CurvatureProfile",
    "ExcessResolution", "FrenetTable", "GroundState", "PanelPartition",
    "PlanarCurve", "QuadratureRule", "RunReport", "ScenarioConfig",
    "TransverseWell", "assemble", "box_for_scenario", "composite_rule",
    "condition_integral", "delta_coupling", "delta_limit_study",
    "dirichlet_threshold", "discrete_spectrum_report", "emit",
    "fiber_top_eigenvalue", "find_bound_states", "flat_bottom_ground_state",
    "gauss_legendre", "load_config", "lowest_eigenvalues", "macdonald_k0",
    "neumann_threshold", "on_curve_excess", "potential_on_grid",
    "reconstruct_curve", "reconstruct_eigenfunction", "report_json", "run",
    "run_sweep", "scaled_well", "solve_ground_state", "squared_distance",
    "straight_bs_check", "strip_coordinates_of", "strip_point",
    "top_eigenvalue", "turning_angle", "validate_assumptions",
    "weighted_ground_function",
]
