"""Wave equations on de Sitter space: solver, energy monitors and experiments."""

from .equations import EquationKind, Variant
from .grid import BumpProfile, Field, GridSpec, make_initial_data
from .integrator import Monitors, RunOutcome, StepControl, evolve, rk4_step

__all__ = [
    "BumpProfile",
    "EquationKind",
    "Field",
    "GridSpec",
    "Monitors",
    "RunOutcome",
    "StepControl",
    "Variant",
    "evolve",
    "make_initial_data",
    "rk4_step",
]
__version__ = "0.1.0"
