from typing import Any

from robin_scope.implementations.errors import HarnessErrors, SpectralException
from robin_scope.implementations.harness.checks import StudyTrendCheck
from robin_scope.implementations.harness.templates.base import Experiment


class DiskConvergeExperiment(Experiment):
    """
    Convergence of h^(-1/2) E and h^(1/2) N on the disk towards the
    semiclassical limits, the energy at physics.lam and the count at
    physics.count_lam. Rows go to ``convergence_energy.csv`` and
    ``convergence_count.csv``; a grid over the unknowns budget raises
    BUDGET_EXCEEDED with the rows computed so far.
    """

    name = "disk-converge"

    def _preconditions(self, context: dict[str, Any], run_id: str) -> None:
        if self._config.geometry.shape != "circle":
            raise SpectralException(
                HarnessErrors.CONFIG_INVALID,
                f"geometry.shape: the disk study needs 'circle', got {self._config.geometry.shape!r}",
            )

    def _run(self, context: dict[str, Any], run_id: str) -> dict[str, Any]:
        ws = context["workspace"]
        p = self._config.physics
        energy = ws.study(gamma=p.gamma, alpha=p.alpha, lam=p.lam, energy=True, count=False)
        count = ws.study(gamma=p.gamma, alpha=p.alpha, lam=p.count_lam, energy=False, count=True)
        self._writer.write_csv("convergence_energy.csv", energy.rows)
        self._writer.write_csv("convergence_count.csv", count.rows)
        return {"energy_study": energy, "count_study": count}

    def _checks(self):
        return (StudyTrendCheck(),)
