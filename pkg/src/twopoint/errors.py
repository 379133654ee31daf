"""Exception hierarchy.

The CLI maps ``DataError`` to exit code 3 and ``NumericalError`` to exit code 4.
"""


class TwoPointError(Exception):
    pass


class DataError(TwoPointError):
    """Bad or insufficient input records."""


class InsufficientDataError(DataError):
    pass


class MalformedRowError(DataError):
    def __init__(self, row: int, content: str, reason: str):
        self.row = row
        self.content = content
        super().__init__(f"row {row}: {reason}: {content!r}")


class NumericalError(TwoPointError):
    """Quadrature, optimisation or sampling failed."""


class DegenerateZoneError(NumericalError):
    pass


class RunawayRejectionError(NumericalError):
    pass


class BootstrapError(NumericalError):
    pass
