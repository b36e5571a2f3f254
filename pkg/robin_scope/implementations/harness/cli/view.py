import sys
from typing import TextIO

from robin_scope.implementations.datastructures import RunReport
from robin_scope.implementations.errors import SpectralException
from robin_scope.implementations.harness.reports import summary_text

EXIT_PASSED = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


class RunView:
    def __init__(self, stream: TextIO = sys.stdout, errors: TextIO = sys.stderr):
        self._stream = stream
        self._errors = errors

    def report(self, report: RunReport, out_dir: str) -> int:
        self._stream.write(summary_text(report))
        self._stream.write(f"\nreport written to {out_dir}\n")
        return EXIT_PASSED if report.passed else EXIT_FAILED

    def budget_exceeded(self, exception: SpectralException, out_dir: str) -> int:
        self._errors.write(f"{exception.error_code}: {exception.message}\n")
        self._errors.write(f"partial report written to {out_dir}\n")
        return EXIT_FAILED

    def invalid(self, exception: SpectralException) -> int:
        self._errors.write(f"{exception.error_code}: {exception.message}\n")
        return EXIT_CONFIG

    def error(self, exception: SpectralException) -> int:
        self._errors.write(f"{exception.error_code}: {exception.message}\n")
        return EXIT_FAILED
