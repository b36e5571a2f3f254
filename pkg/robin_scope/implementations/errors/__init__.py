from robin_scope.implementations.errors.geometry import GeometryErrors
from robin_scope.implementations.errors.band import BandErrors
from robin_scope.implementations.errors.model import ModelErrors
from robin_scope.implementations.errors.semiclassical import SemiclassicalErrors
from robin_scope.implementations.errors.solver import SolverErrors
from robin_scope.implementations.errors.harness import HarnessErrors
from robin_scope.implementations.errors.exceptions import SpectralException
__all__ = [
    "GeometryErrors",
    "BandErrors",
    "ModelErrors",
    "SemiclassicalErrors",
    "SolverErrors",
    "HarnessErrors",
    "SpectralException",
]
