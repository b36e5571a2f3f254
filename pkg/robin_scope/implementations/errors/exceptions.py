from typing import Any, Optional


class SpectralException(Exception):
    """
    Base exception for numerical failures in robin_scope.

    ``error_code`` is one of the registered codes (see ``registry/``),
    ``detail`` carries structured context such as a partial report.
    """
    def __init__(self, error_code: str, message: str, detail: Optional[Any] = None):
        self.error_code = error_code
        self.message = message
        self.detail = detail
        super().__init__(message)
