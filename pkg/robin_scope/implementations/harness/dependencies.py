import logging
import time
from typing import Optional

import structlog

from robin_scope.implementations.harness.config import RunConfig
from robin_scope.implementations.harness.reports import ReportWriter


class SystemClock:
    def now(self) -> float:
        return time.perf_counter()


def configure_logging(log_format: str = "console", level: str = "info") -> None:
    renderer = (
        structlog.processors.JSONRenderer()
        if log_format == "json"
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(
            logging.getLevelNamesMapping().get(level.upper(), logging.INFO)
        ),
        cache_logger_on_first_use=False,
    )


class Dependencies:
    _instance = None

    def __init__(self, config: Optional[RunConfig] = None):
        self.config = config or RunConfig()
        configure_logging(self.config.run.log_format, self.config.run.log_level)
        self.clock = SystemClock()
        self.logger = structlog.get_logger("robin_scope.harness")
        self.writer = ReportWriter(self.config.run.out)

    @classmethod
    def get_instance(cls, config: Optional[RunConfig] = None) -> "Dependencies":
        if cls._instance is None or (config is not None and config is not cls._instance.config):
            cls._instance = cls(config)
        return cls._instance
