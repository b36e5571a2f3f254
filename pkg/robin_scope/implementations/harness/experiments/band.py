from pathlib import Path
from typing import Any

import numpy as np

from robin_scope.implementations import band1d
from robin_scope.implementations.errors import HarnessErrors, SpectralException
from robin_scope.implementations.harness.checks import MonotonicityCheck, SnapshotCheck, SymmetryAnchorsCheck
from robin_scope.implementations.harness.templates.base import Experiment


class BandExperiment(Experiment):
    """
    Builds (or loads) the band table, writes it as ``band_table.dat`` and
    tabulates Theta(gamma) with its minimizer for every gamma of the grid.
    """

    name = "band"

    def _preconditions(self, context: dict[str, Any], run_id: str) -> None:
        band = self._config.band
        if band.table is not None and not Path(band.table).is_file():
            raise SpectralException(HarnessErrors.CONFIG_INVALID, f"band.table: {band.table} is not a file")

    def _run(self, context: dict[str, Any], run_id: str) -> dict[str, Any]:
        ws = context["workspace"]
        table = ws.table
        path = band1d.save_band_table(table, self._writer.file("band_table.dat"))

        disc = table.disc
        minima = [band1d.theta(float(g), 1, disc) for g in table.gamma_grid]
        theta = np.array([m[0] for m in minima])
        argmin = np.array([m[1] for m in minima])
        self._writer.write_columns("theta.dat", "gamma Theta xi_min", (table.gamma_grid, theta, argmin))

        self._logger.info("harness.band.table", run_id=run_id, file=str(path), p_max=table.p_max)
        return {
            "table": {
                "file": path.name,
                "p_max": table.p_max,
                "gamma_grid": table.gamma_grid,
                "xi_range": [float(table.xi_grid[0]), float(table.xi_grid[-1])],
                "xi_nodes": int(table.xi_grid.size),
            },
            "theta": {f"{g:g}": {"Theta": t, "xi_min": x} for g, t, x in zip(table.gamma_grid, theta, argmin)},
        }

    def _checks(self):
        return (SymmetryAnchorsCheck(), MonotonicityCheck(), SnapshotCheck())
