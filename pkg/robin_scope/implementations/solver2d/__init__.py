from robin_scope.implementations.solver2d.disk import (
    disk_fiber_solve,
    disk_full_solve,
    form_lower_bound_probe,
    polar_operator,
    threshold_for,
)
from robin_scope.implementations.solver2d.square import (
    square_operator,
    square_solve,
    upper_bracket_constant,
)
from robin_scope.implementations.solver2d.study import (
    aitken,
    convergence_study,
    energy_and_count,
    energy_difference_count,
)

__all__ = [
    "disk_fiber_solve",
    "disk_full_solve",
    "form_lower_bound_probe",
    "polar_operator",
    "threshold_for",
    "square_operator",
    "square_solve",
    "upper_bracket_constant",
    "aitken",
    "convergence_study",
    "energy_and_count",
    "energy_difference_count",
]
