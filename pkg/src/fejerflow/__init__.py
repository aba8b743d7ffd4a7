"""fejerflow: quantitative convergence certificates for continuous-time
Fejer monotone dynamical systems, flow simulation, and empirical verification
of every certificate against trajectories."""

from .counterfunctions import Counterfunction
from .exact import BudgetExceeded, ExtendedNatural, PrecisionExhausted, R, Real
from .flows import ParameterCurve, Trajectory
from .space import SpaceDescriptor, euclidean
from .verify import SolutionFunction, VerificationReport

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded",
    "Counterfunction",
    "ExtendedNatural",
    "ParameterCurve",
    "PrecisionExhausted",
    "R",
    "Real",
    "SolutionFunction",
    "SpaceDescriptor",
    "Trajectory",
    "VerificationReport",
    "euclidean",
]
