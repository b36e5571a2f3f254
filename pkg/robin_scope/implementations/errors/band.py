# AUTO-GENERATED FILE - DO NOT EDIT
# Source: registry/band.json

class BandErrors:
    BOUNDARY_BOUND_VIOLATION = "band.boundary_bound_violation"
    EMPTY_INTERVAL = "band.empty_interval"
    INVALID_DISCRETIZATION = "band.invalid_discretization"
    MONOTONICITY_VIOLATION = "band.monotonicity_violation"
    NO_INTERIOR_MINIMUM = "band.no_interior_minimum"
    TABLE_FORMAT = "band.table_format"
    UNBOUNDED_SUBLEVEL = "band.unbounded_sublevel"
    UNRESOLVED_BAND = "band.unresolved_band"
