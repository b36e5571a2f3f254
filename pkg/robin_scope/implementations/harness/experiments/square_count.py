import math
from typing import Any

from robin_scope.implementations import solver2d
from robin_scope.implementations.errors import HarnessErrors, SpectralException
from robin_scope.implementations.harness.checks import SquareCountingCheck
from robin_scope.implementations.harness.templates.base import Experiment


class SquareCountExperiment(Experiment):
    name = "square-count"

    def _preconditions(self, context: dict[str, Any], run_id: str) -> None:
        if len(self._config.study.square_flux) < 2:
            raise SpectralException(
                HarnessErrors.CONFIG_INVALID, "study.square_flux: the bracket needs at least two sizes"
            )

    def _run(self, context: dict[str, Any], run_id: str) -> dict[str, Any]:
        ws = context["workspace"]
        rows = []
        for flux in self._config.study.square_flux:
            problem = ws.square_problem(flux)
            result = ws.square(flux)
            _, count = solver2d.energy_and_count(result.eigenvalues, problem.lam, problem.h, result.threshold)
            rows.append({
                "flux": flux,
                "h": problem.h,
                "count": count,
                "scaled_count": problem.h * count,
                "C_fit": solver2d.upper_bracket_constant(count, 1.0 / math.sqrt(problem.h)),
                "unknowns": result.unknowns,
            })
        self._writer.write_csv("square_count.csv", rows)
        return {"rows": rows, "limit": 1.0 / (2.0 * math.pi)}

    def _checks(self):
        return (SquareCountingCheck(),)
