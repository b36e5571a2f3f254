# AUTO-GENERATED FILE - DO NOT EDIT
# Source: registry/harness.json

class HarnessErrors:
    CHECK_CRASHED = "harness.check_crashed"
    CHECK_FAILED = "harness.check_failed"
    CONFIG_INVALID = "harness.config_invalid"
    SNAPSHOT_MISMATCH = "harness.snapshot_mismatch"
    UNKNOWN_EXPERIMENT = "harness.unknown_experiment"
