from abc import ABC, abstractmethod
from typing import Any, Mapping, Sequence

from robin_scope.implementations.datastructures import Result, RunReport


class Condition(ABC):
    """
    Base class for validation steps and acceptance checks.

    Conditions never raise for a negative outcome: they return a
    FailedResult carrying an error code. ``criterion`` names the acceptance
    criterion a check belongs to; ``budgets`` lists the validation budgets
    that run it.
    """

    criterion: str = ""
    budgets: frozenset[str] = frozenset({"quick", "full"})

    @abstractmethod
    def validate(
        self,
        *,
        context: Mapping[str, Any],
        run_id: str,
    ) -> Result:
        ...


class Experiment(ABC):
    """
    Base class for all harness experiments.

    This class defines the *lifecycle* of a run: preconditions, the
    computation, then the acceptance checks attached to the experiment.
    Concrete subclasses implement the experiment-specific steps.
    """

    name: str = ""

    def __init__(
        self,
        *,
        clock,
        config,
        logger,
        writer,
    ):
        """
        Dependencies are injected, not imported.

        - clock: monotonic clock for stage timings
        - config: validated RunConfig
        - logger: structured logger
        - writer: report and data-file writer for the output directory
        """
        self._clock = clock
        self._config = config
        self._logger = logger
        self._writer = writer
        self._timings: dict[str, float] = {}

    def _preconditions(self, context: dict[str, Any], run_id: str) -> None:
        """
        Validate experiment-specific preconditions; none by default.

        MUST raise SpectralException on failure.
        """

    @abstractmethod
    def _run(self, context: dict[str, Any], run_id: str) -> dict[str, Any]:
        """
        Execute the computation.

        MUST return a serializable mapping of results.
        """
        ...

    def _checks(self) -> Sequence[Condition]:
        return ()

    def _postconditions(self, context: dict[str, Any], results: dict[str, Any], run_id: str) -> list[Result]:
        from robin_scope.implementations.harness.helpers.condition_executor import ConditionChain

        context["results"] = results
        return ConditionChain(self._checks(), stop_on_failure=False).collect(context=context, run_id=run_id)

    def _stage(self, name: str, fn, *args, **kwargs):
        """Run one stage and record its wall-clock time."""
        started = self._clock.now()
        try:
            return fn(*args, **kwargs)
        finally:
            self._timings[name] = self._clock.now() - started

    def _log_start(self, run_id: str) -> None:
        self._logger.info(
            "harness.experiment.start",
            experiment=self.name,
            run_id=run_id,
        )

    def _log_success(self, report: RunReport) -> None:
        self._logger.info(
            "harness.experiment.finish",
            experiment=self.name,
            run_id=report.run_id,
            passed=report.passed,
            checks=len(report.checks),
        )

    def execute(self, *, context: dict[str, Any], run_id: str) -> RunReport:
        """
        Execute the experiment and write its report.

        This method MUST NOT be overridden.
        """
        self._log_start(run_id)

        self._stage("preconditions", self._preconditions, context, run_id)

        results = self._stage("run", self._run, context, run_id)

        checks = self._stage("checks", self._postconditions, context, results, run_id)

        report = RunReport(
            experiment=self.name,
            run_id=run_id,
            config=self._config.as_dict(),
            results=results,
            checks=checks,
            timings=dict(self._timings),
        )
        self._writer.write_report(report)

        self._log_success(report)

        return report
