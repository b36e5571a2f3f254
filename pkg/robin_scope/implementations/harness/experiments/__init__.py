"""
Experiment registry and the two entry points of the harness.

``run_experiment`` runs the experiment named by ``config.run.experiment``;
``validate_all`` runs the acceptance suite for a budget. Both write
``report.json`` and ``summary.txt`` into ``config.run.out``.
"""
import uuid
from typing import Optional

from robin_scope.implementations.datastructures import RunReport
from robin_scope.implementations.errors import HarnessErrors, SpectralException
from robin_scope.implementations.harness.config import RunConfig, validate_config
from robin_scope.implementations.harness.dependencies import Dependencies
from robin_scope.implementations.harness.experiments.band import BandExperiment
from robin_scope.implementations.harness.experiments.disk_converge import DiskConvergeExperiment
from robin_scope.implementations.harness.experiments.limits import LimitsExperiment
from robin_scope.implementations.harness.experiments.lt_check import LiebThirringExperiment
from robin_scope.implementations.harness.experiments.models import ModelsExperiment
from robin_scope.implementations.harness.experiments.square_count import SquareCountExperiment
from robin_scope.implementations.harness.experiments.validate import ValidateExperiment
from robin_scope.implementations.harness.templates.base import Experiment
from robin_scope.implementations.harness.workspace import Workspace

REGISTRY: dict[str, type[Experiment]] = {
    cls.name: cls
    for cls in (
        BandExperiment,
        LimitsExperiment,
        ModelsExperiment,
        DiskConvergeExperiment,
        SquareCountExperiment,
        LiebThirringExperiment,
        ValidateExperiment,
    )
}


def build_experiment(deps: Dependencies) -> Experiment:
    name = deps.config.run.experiment
    if name not in REGISTRY:
        raise SpectralException(HarnessErrors.UNKNOWN_EXPERIMENT, f"run.experiment: unknown experiment {name!r}")
    return REGISTRY[name](clock=deps.clock, config=deps.config, logger=deps.logger, writer=deps.writer)


def run_experiment(config: RunConfig, run_id: Optional[str] = None) -> RunReport:
    config = validate_config(config)
    run_id = run_id or str(uuid.uuid4())
    deps = Dependencies.get_instance(config)
    experiment = build_experiment(deps)
    context = {"workspace": Workspace(config), "config": config, "budget": config.run.budget}
    return experiment.execute(context=context, run_id=run_id)


def validate_all(budget: str = "quick", config: Optional[RunConfig] = None, run_id: Optional[str] = None) -> RunReport:
    config = (config or RunConfig()).with_overrides(experiment="validate", budget=budget)
    return run_experiment(config, run_id)


__all__ = ["REGISTRY", "build_experiment", "run_experiment", "validate_all"]
