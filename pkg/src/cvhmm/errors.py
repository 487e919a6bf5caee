"""Validation errors carrying machine-parsable codes."""


class ValidationError(ValueError):
    """Raised when an input violates a documented contract.

    ``code`` is a short stable identifier; the CLI reports failures on
    stderr as ``ERROR:<code>:<message>``.
    """

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message

    def __str__(self) -> str:
        return self.message
