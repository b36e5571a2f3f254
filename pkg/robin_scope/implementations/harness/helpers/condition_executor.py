from typing import Any, Mapping, Sequence

import structlog

from robin_scope.implementations.datastructures import FailedResult, Result, SuccessResult
from robin_scope.implementations.errors import HarnessErrors, SpectralException
from robin_scope.implementations.harness.templates.base import Condition

logger = structlog.get_logger(__name__)


class ConditionChain:
    """
    Executes a sequence of Conditions in order.

    ``execute`` returns the first FailedResult, stopping there unless
    ``stop_on_failure`` is False; ``collect`` runs every
    condition and returns all results, turning an exception inside a
    condition into a FailedResult so that the suite continues.
    """

    def __init__(self, conditions: Sequence[Condition], *, stop_on_failure: bool = True):
        self._conditions = list(conditions)
        self._stop_on_failure = stop_on_failure

    def execute(
        self,
        *,
        context: Mapping[str, Any],
        run_id: str,
    ) -> Result:
        first_failure: Result | None = None
        for condition in self._conditions:
            result = condition.validate(
                context=context,
                run_id=run_id,
            )

            if result.status is False:
                if self._stop_on_failure:
                    return result
                if first_failure is None:
                    first_failure = result

        return first_failure if first_failure is not None else SuccessResult(run_id=run_id)

    def collect(
        self,
        *,
        context: Mapping[str, Any],
        run_id: str,
    ) -> list[Result]:
        results: list[Result] = []
        for condition in self._conditions:
            try:
                result = condition.validate(context=context, run_id=run_id)
            except SpectralException as exc:
                result = FailedResult(
                    run_id=run_id,
                    message=f"{exc.error_code}: {exc.message}",
                    error_code=HarnessErrors.CHECK_CRASHED,
                )
            except Exception as exc:
                result = FailedResult(
                    run_id=run_id,
                    message=f"{type(exc).__name__}: {exc}",
                    error_code=HarnessErrors.CHECK_CRASHED,
                )
            if result.criterion is None:
                result.criterion = condition.criterion
            logger.info(
                "harness.check",
                criterion=result.criterion,
                passed=result.status,
                run_id=run_id,
            )
            results.append(result)
            if result.status is False and self._stop_on_failure:
                break
        return results
