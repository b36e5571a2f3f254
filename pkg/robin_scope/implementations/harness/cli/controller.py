import argparse
import uuid

from robin_scope.implementations.datastructures import FailedResult, RunReport
from robin_scope.implementations.errors import HarnessErrors, SolverErrors, SpectralException
from robin_scope.implementations.harness.cli.view import RunView
from robin_scope.implementations.harness.config import load_config
from robin_scope.implementations.harness.dependencies import Dependencies
from robin_scope.implementations.harness.experiments import run_experiment

INPUT_ERRORS = frozenset({HarnessErrors.CONFIG_INVALID, HarnessErrors.UNKNOWN_EXPERIMENT})


class RunController:
    def __init__(self, view: RunView):
        self._view = view

    def handle(self, args: argparse.Namespace) -> int:
        run_id = str(uuid.uuid4())

        # 1. Configuration: file values, then flags
        try:
            config = load_config(args.config, run_id).with_overrides(
                experiment=args.experiment,
                out=args.out,
                budget=args.budget,
                threads=args.threads,
                log_format=args.log_format,
                log_level="debug" if args.verbose else None,
            )
        except SpectralException as exc:
            return self._view.invalid(exc)

        # 2. Run
        try:
            report = run_experiment(config, run_id)
        except SpectralException as exc:
            if exc.error_code in INPUT_ERRORS:
                return self._view.invalid(exc)
            if exc.error_code == SolverErrors.BUDGET_EXCEEDED:
                self._write_partial(config, run_id, exc)
                return self._view.budget_exceeded(exc, config.run.out)
            return self._view.error(exc)

        return self._view.report(report, config.run.out)

    def _write_partial(self, config, run_id: str, exc: SpectralException) -> None:
        deps = Dependencies.get_instance(config)
        deps.writer.write_report(
            RunReport(
                experiment=config.run.experiment,
                run_id=run_id,
                config=config.as_dict(),
                results={"partial": exc.detail},
                checks=[
                    FailedResult(
                        run_id=run_id,
                        message=exc.message,
                        error_code=exc.error_code,
                        criterion="budget",
                    )
                ],
            )
        )
