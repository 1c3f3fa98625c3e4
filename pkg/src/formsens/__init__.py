"""FORM system reliability and variance-based reliability sensitivity indices.

The typical flow is: describe inputs as a :class:`RandomVector`, parse limit
states, find design points, assemble a :class:`LinearizedSystem` and hand it
to :func:`system_sensitivity`.  :mod:`formsens.mc` provides a sampling
reference for the same problem.
"""

__version__ = "0.1.0"

from .errors import FormsensError, NumericalError, ValidationError  # noqa: E402
from .probability import Lognormal, Normal, RandomVector, marginal  # noqa: E402
from .limit_state import (ReliabilityProblem, SystemDefinition,  # noqa: E402
                          parse_limit_state, u_space_function)
from .mvn import MvnOptions, MvnProblem, mvn_cdf  # noqa: E402
from .form import (LinearizedSystem, SolverOptions, assemble_system,  # noqa: E402
                   find_design_point, find_joint_design_point, linear_system,
                   multi_start_design_points)
from .sensitivity import (Estimate, SensitivityReport, closed_index,  # noqa: E402
                          first_order_index, form_parallel_probability, form_probability,
                          form_series_probability, form_system_probability,
                          system_sensitivity, total_effect_index, var_cond_exp,
                          variance_component)
from .mc import crude_mc_probability, indicator, pick_freeze_indices  # noqa: E402

__all__ = [
    "FormsensError", "NumericalError", "ValidationError",
    "Normal", "Lognormal", "RandomVector", "marginal",
    "ReliabilityProblem", "SystemDefinition", "parse_limit_state", "u_space_function",
    "MvnOptions", "MvnProblem", "mvn_cdf",
    "LinearizedSystem", "SolverOptions", "assemble_system", "find_design_point",
    "find_joint_design_point", "linear_system", "multi_start_design_points",
    "Estimate", "SensitivityReport", "closed_index", "first_order_index",
    "form_parallel_probability", "form_probability", "form_series_probability",
    "form_system_probability", "system_sensitivity", "total_effect_index", "var_cond_exp",
    "variance_component",
    "crude_mc_probability", "indicator", "pick_freeze_indices",
]
