from __future__ import annotations


class BlockRRError(ValueError):
    """Raised for every contract violation in the package.

    ``code`` is a stable upper-case name (``OVERLAPPING_PARTITION``,
    ``LABEL_OUT_OF_RANGE``, ...) that callers and the CLI can dispatch on.
    """

    def __init__(self, code: str, message: str = ""):
        self.code = code
        self.message = message or code
        super().__init__(f"{code}: {self.message}")


class ConfigError(BlockRRError):
    pass


class DataError(BlockRRError):
    pass


class MalformedMatrixError(BlockRRError):
    def __init__(self, message: str = ""):
        super().__init__("MALFORMED_MATRIX", message)
