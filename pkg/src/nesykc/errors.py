"""Exception hierarchy shared by every nesykc module."""


class NesykcError(Exception):
    """Base class for all library errors."""


class TheoryError(NesykcError, ValueError):
    """Malformed theory, state or probability vector."""


class DimensionError(TheoryError):
    pass


class CycleError(TheoryError):
    pass


class OracleCapError(NesykcError):
    """Brute-force enumeration refused because the theory has too many variables."""


class UnsatisfiableError(NesykcError):
    pass


class IntractableError(NesykcError):
    """The requested query has no polynomial route for this language."""


class StructureError(NesykcError):
    """A circuit does not have the structural properties a query needs."""


class InconsistentForcingError(NesykcError, ValueError):
    pass


class CircuitFormatError(NesykcError, ValueError):
    pass
