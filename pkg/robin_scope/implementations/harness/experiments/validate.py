from typing import Any

from robin_scope.implementations.harness.checks import suite
from robin_scope.implementations.harness.templates.base import Experiment


class ValidateExperiment(Experiment):
    """The acceptance suite for the configured budget; failures do not stop it."""

    name = "validate"

    def _preconditions(self, context: dict[str, Any], run_id: str) -> None:
        context["budget"] = self._config.run.budget

    def _run(self, context: dict[str, Any], run_id: str) -> dict[str, Any]:
        return {
            "budget": self._config.run.budget,
            "suite": [check.criterion for check in self._checks()],
        }

    def _checks(self):
        return suite(self._config.run.budget)
