from typing import Any

import numpy as np

from robin_scope.implementations.errors import HarnessErrors, SpectralException
from robin_scope.implementations.harness.checks import FunctionalConsistencyCheck
from robin_scope.implementations.harness.templates.base import Experiment

LEVEL_SWEEP = np.linspace(0.5, 1.0, 11)


class LimitsExperiment(Experiment):
    """Semiclassical energy and counting limits for the configured boundary."""

    name = "limits"

    def _preconditions(self, context: dict[str, Any], run_id: str) -> None:
        ws = context["workspace"]
        gamma = self._config.physics.gamma
        grid = ws.table.gamma_grid
        # couplings vanish for alpha > 1/2, so gamma = 0 must be tabulated as well
        if not (grid[0] <= min(gamma, 0.0) and max(gamma, 0.0) <= grid[-1]):
            raise SpectralException(
                HarnessErrors.CONFIG_INVALID,
                f"physics.gamma={gamma} outside the band table range [{grid[0]:g}, {grid[-1]:g}]",
            )

    def _run(self, context: dict[str, Any], run_id: str) -> dict[str, Any]:
        ws = context["workspace"]
        p = self._config.physics

        energy = ws.energy_limit(p.lam, p.gamma, p.alpha)
        count = ws.count_limit(p.count_lam, p.gamma, p.alpha)
        summed = ws.count_limit(p.count_lam, p.gamma, p.alpha, exact=False)

        levels = p.b * LEVEL_SWEEP
        sweep_energy = [ws.energy_limit(float(lam), p.gamma, p.alpha).value for lam in levels]
        # the counting limit only exists strictly below the field infimum
        sweep_count = [
            ws.count_limit(float(lam), p.gamma, p.alpha).value if lam < p.b else np.nan for lam in levels
        ]
        self._writer.write_columns("limits.dat", "lam energy_limit count_limit", (levels, sweep_energy, sweep_count))

        self._logger.info(
            "harness.limits", run_id=run_id, energy=energy.value, count=count.value, unproven=energy.unproven_regime
        )
        return {
            "boundary_length": ws.curve.total_length,
            "energy_limit": energy,
            "count_limit": count,
            "count_limit_density_sum": summed,
            "count_methods_gap": abs(count.value - summed.value),
        }

    def _checks(self):
        return (FunctionalConsistencyCheck(),)
