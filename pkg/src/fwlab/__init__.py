"""Projection-free first-order optimization over compact convex sets.

The solver accesses the feasible region only through linear minimization
(Frank-Wolfe iterations), records instrumented traces, and the analysis
layer certifies the sharpness conditions that separate o(1/t) instances
from the classical 1/t worst case.
"""

from .analysis import (ExponentFit, LdsCertificate, LdsEstimate, check_geometric_decay,
                       check_h_decay, check_uc, estimate_lds, estimate_uc_alpha,
                       fit_exponent, lds_from_patch, lds_from_uc,
                       power_descent_oracle, pre_floor_window)
from .errors import (ConfigError, ConvergenceFailure, InvariantViolation,
                     NumericFailure)
from .geometry import (Box, Capsule, Ellipsoid, FeasibleSet, L2Ball, LpBall,
                       Simplex, Stadium, TruncatedDisk, UcParams,
                       VertexPolytope, superflat_body)
from .objectives import (DistancePower, GroundTruth, HebCertificate, Linear,
                         Objective, Quadratic, StadiumPsi)
from .scenarios import REGISTRY, Scenario, get_scenario, make_rule, scenario_names
from .solver import IterateRecord, Trace, reference_solve, run
from .stepping import LineSearch, OpenLoop, ShortStep, StepRule, step_size
from .traceio import (TraceFrame, read_summary_json, read_trace_csv,
                      write_summary_json, write_trace_csv)

__version__ = "0.1.0"

__all__ = [
    "Box", "Capsule", "ConfigError", "ConvergenceFailure", "DistancePower",
    "Ellipsoid", "ExponentFit", "FeasibleSet", "GroundTruth", "HebCertificate",
    "InvariantViolation", "IterateRecord", "L2Ball", "LdsCertificate",
    "LdsEstimate", "Linear", "LineSearch", "LpBall", "NumericFailure",
    "Objective", "OpenLoop", "Quadratic", "REGISTRY", "Scenario", "ShortStep",
    "Simplex", "Stadium", "StadiumPsi", "StepRule", "Trace", "TraceFrame",
    "TruncatedDisk", "UcParams", "VertexPolytope", "check_geometric_decay",
    "check_h_decay", "check_uc", "estimate_lds", "estimate_uc_alpha",
    "fit_exponent", "get_scenario", "lds_from_patch", "lds_from_uc",
    "make_rule", "power_descent_oracle", "read_summary_json", "read_trace_csv",
    "pre_floor_window", "reference_solve", "run", "scenario_names",
    "step_size", "superflat_body",
    "write_summary_json", "write_trace_csv",
]
