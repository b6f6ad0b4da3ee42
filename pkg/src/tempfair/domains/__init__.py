from .base import (BackendMismatch, Candidate, ConstraintViolation, DomainInstance,
                   InfeasibleError, StepIP)
from .cap import CapInstance, assignment_from_loads
from .nsp import NspInstance, example_instance as nsp_example
from .tap import TapInstance, hungarian, tap_hungarian
from .vrp import VrpInstance, subtour_cuts

__all__ = [
    "BackendMismatch", "Candidate", "ConstraintViolation", "DomainInstance",
    "InfeasibleError", "StepIP", "CapInstance", "assignment_from_loads",
    "NspInstance", "nsp_example", "TapInstance", "hungarian", "tap_hungarian",
    "VrpInstance", "subtour_cuts",
]
