# AUTO-GENERATED FILE - DO NOT EDIT
# Source: registry/geometry.json

class GeometryErrors:
    COLLAR_TOO_DEEP = "geometry.collar_too_deep"
    DEGENERATE_CURVE = "geometry.degenerate_curve"
    INVALID_CURVE_FILE = "geometry.invalid_curve_file"
    OUTSIDE_COLLAR = "geometry.outside_collar"
    WINDOW_TOO_DEEP = "geometry.window_too_deep"
