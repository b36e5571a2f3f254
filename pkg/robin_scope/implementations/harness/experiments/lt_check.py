from typing import Any

from robin_scope.implementations import model_spectra
from robin_scope.implementations.harness.checks import LiebThirringCheck
from robin_scope.implementations.harness.templates.base import Experiment


class LiebThirringExperiment(Experiment):
    """Lieb-Thirring moments on the half-line (exact) and on the strip (discretized bump)."""

    name = "lt-check"

    def _run(self, context: dict[str, Any], run_id: str) -> dict[str, Any]:
        m = self._config.models
        rows = [
            model_spectra.lt_bound_check(alpha, 0, gamma)
            for alpha in m.lt_alphas
            for gamma in m.lt_gammas
        ]
        bump = model_spectra.mollified_bump(m.lt_bump_height, m.lt_bump_half_width)
        rows += [model_spectra.lt_bound_check(alpha, 1, bump) for alpha in m.lt_bump_alphas]
        self._writer.write_csv(
            "lieb_thirring.csv",
            [
                {"alpha": r.alpha, "dimension": r.dimension, "lhs": r.lhs, "rhs": r.rhs, "margin": r.margin}
                for r in rows
            ],
        )
        return {"checks": rows, "all_hold": all(r.holds for r in rows)}

    def _checks(self):
        return (LiebThirringCheck(),)
