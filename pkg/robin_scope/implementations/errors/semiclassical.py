# AUTO-GENERATED FILE - DO NOT EDIT
# Source: registry/semiclassical.json

class SemiclassicalErrors:
    INVALID_TRACE = "semiclassical.invalid_trace"
    LEVEL_ABOVE_FIELD = "semiclassical.level_above_field"
    LEVEL_NOT_BELOW_FIELD = "semiclassical.level_not_below_field"
    MISSING_SUP_BOUND = "semiclassical.missing_sup_bound"
    QUADRATURE_UNRESOLVED = "semiclassical.quadrature_unresolved"
    TABLE_TOO_SMALL = "semiclassical.table_too_small"
