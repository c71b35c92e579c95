"""Exact hypernormal forms for Bogdanov-Takens singularities in the generalized saddle-node case."""

from .algebra import (
    GradingContext, NotBogdanovTakensError, PlanarSystem, VectorFieldSeries, bracket,
    from_basis, module_action, to_basis,
)
from .normalization import (
    DegenerateError, NormalFormReport, RankDeficientError, TransformationLog,
    UnsupportedCaseError, classical_nf, orbital_nf, parametric_nf, run_example_system,
    simplest_nf,
)
from .solver import HomologicalSolver

__all__ = [
    "DegenerateError", "GradingContext", "HomologicalSolver", "NormalFormReport",
    "NotBogdanovTakensError", "PlanarSystem", "RankDeficientError", "TransformationLog",
    "UnsupportedCaseError", "VectorFieldSeries", "bracket", "classical_nf", "from_basis",
    "module_action", "orbital_nf", "parametric_nf", "run_example_system", "simplest_nf",
    "to_basis",
]
