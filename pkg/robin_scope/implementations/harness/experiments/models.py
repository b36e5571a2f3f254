from typing import Any

from robin_scope.implementations import model_spectra
from robin_scope.implementations.datastructures import CylinderModel
from robin_scope.implementations.harness.checks import (
    DirichletSquareCheck,
    FiberEquivalenceCheck,
    TorusLandauCheck,
)
from robin_scope.implementations.harness.templates.base import Experiment


class ModelsExperiment(Experiment):
    """
    Model operators with known spectra: Landau clusters on the torus,
    Dirichlet counts on the square and the half-plane-model cylinder.
    One ``.dat`` file per model.
    """

    name = "models"

    def _run(self, context: dict[str, Any], run_id: str) -> dict[str, Any]:
        ws = context["workspace"]
        m = self._config.models
        p = self._config.physics

        torus = {}
        for n in m.torus_flux:
            spectrum = ws.torus(n)
            self._writer.write_columns(
                f"torus_flux{n}.dat", "center multiplicity", (spectrum.centers, spectrum.multiplicities)
            )
            torus[f"flux{n}"] = {"centers": spectrum.centers, "multiplicities": spectrum.multiplicities}

        dirichlet = {f"{Lam:g}": ws.dirichlet(Lam) for Lam in m.dirichlet_levels}

        cylinder = CylinderModel(
            h=m.cylinder_h, b=p.b, S=m.cylinder_S, T=m.cylinder_T, gamma=p.gamma, alpha=p.alpha
        )
        values = model_spectra.cylinder_fiber_spectrum(cylinder, m.cylinder_count)
        self._writer.write_columns("cylinder.dat", "index eigenvalue", (range(1, values.size + 1), values))

        self._logger.info("harness.models", run_id=run_id, torus=len(torus), dirichlet=dirichlet)
        return {
            "torus": torus,
            "dirichlet_counts": dirichlet,
            "dirichlet_side": m.dirichlet_side,
            "cylinder": {
                "eigenvalues": values,
                "count_below_level": model_spectra.cylinder_count(cylinder, p.count_lam),
            },
        }

    def _checks(self):
        return (FiberEquivalenceCheck(), TorusLandauCheck(), DirichletSquareCheck())
