# AUTO-GENERATED FILE - DO NOT EDIT
# Source: registry/model.json

class ModelErrors:
    GRID_TOO_COARSE = "model.grid_too_coarse"
    INVALID_MODEL = "model.invalid_model"
    PHASE_MISMATCH = "model.phase_mismatch"
    THRESHOLD_TOO_LOW = "model.threshold_too_low"
    TRUNCATION_TOO_SMALL = "model.truncation_too_small"
