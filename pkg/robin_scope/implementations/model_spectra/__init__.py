from robin_scope.implementations.model_spectra.halfplane import (
    cylinder_count,
    cylinder_direct_spectrum,
    cylinder_energy,
    cylinder_fiber_spectrum,
    cylinder_spectrum,
    default_n_t,
    fiber_discretization,
    fiber_spectrum,
)
from robin_scope.implementations.model_spectra.landau import (
    dirichlet_lower_bound,
    dirichlet_square_count,
    fit_cdv_constant,
    nu_b,
    periodic_count,
    torus_landau_spectrum,
)
from robin_scope.implementations.model_spectra.lieb_thirring import (
    lt_bound_check,
    lt_classical_constant,
    mollified_bump,
    negative_eigenvalues,
)

__all__ = [
    "cylinder_count",
    "cylinder_direct_spectrum",
    "cylinder_energy",
    "cylinder_fiber_spectrum",
    "cylinder_spectrum",
    "default_n_t",
    "fiber_discretization",
    "fiber_spectrum",
    "dirichlet_lower_bound",
    "dirichlet_square_count",
    "fit_cdv_constant",
    "nu_b",
    "periodic_count",
    "torus_landau_spectrum",
    "lt_bound_check",
    "lt_classical_constant",
    "mollified_bump",
    "negative_eigenvalues",
]
