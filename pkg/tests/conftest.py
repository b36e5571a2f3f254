import numpy as np
import pytest

from robin_scope.implementations import band1d, geometry
from robin_scope.implementations.datastructures import HalfLineDiscretization
from robin_scope.implementations.harness.config import RunConfig, parse_config
from robin_scope.implementations.harness.dependencies import Dependencies

# ============================================================================
# Shared numerical fixtures
# ============================================================================

TABLE_GAMMAS = (-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0)
TABLE_DISC = HalfLineDiscretization(spacing=0.01)


@pytest.fixture(scope="session")
def band_table():
    """Band table shared by the semiclassical and harness suites."""
    xi = np.linspace(-6.0, 8.0, 561)
    return band1d.band_table(TABLE_GAMMAS, xi, 4, TABLE_DISC, threads=4)


@pytest.fixture(scope="session")
def table_file(band_table, tmp_path_factory):
    path = tmp_path_factory.mktemp("band") / "band_table.dat"
    return band1d.save_band_table(band_table, path)


@pytest.fixture(scope="session")
def unit_circle_curve():
    return geometry.circle(1.0, 256)


# ============================================================================
# Harness fixtures
# ============================================================================

@pytest.fixture
def quick_config(tmp_path, table_file):
    """Small run configuration reading the session band table."""
    return parse_config({
        "run": {"out": str(tmp_path / "run"), "threads": 2, "log_level": "warning"},
        "band": {
            "gamma_grid": list(TABLE_GAMMAS),
            "xi_step": 0.025,
            "spacing": TABLE_DISC.spacing,
            "table": str(table_file),
            "oracle_nodes": 5,
        },
    })


@pytest.fixture(autouse=True)
def fresh_dependencies():
    Dependencies._instance = None
    yield
    Dependencies._instance = None


@pytest.fixture
def default_config():
    return RunConfig()
