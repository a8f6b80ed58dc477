"""Exception hierarchy and process exit codes."""

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_PRECISION = 3
EXIT_INTERNAL = 4


class HeightlabError(Exception):
    """Base class for all package errors."""


class ValidationError(HeightlabError):
    """Bad input: off-curve point, malformed config, unparseable expression."""

    exit_code = EXIT_VALIDATION


class DomainError(ValidationError):
    """Operation called outside its contract (excluded level, bad reduction...)."""


class PrecisionError(HeightlabError):
    """A numeric kernel ran out of precision before certifying its result."""

    exit_code = EXIT_PRECISION


class InconclusiveError(HeightlabError):
    """A bounded search ended without a certificate either way."""

    exit_code = EXIT_PRECISION


class AmbiguousValuationError(HeightlabError):
    """Tied minimal valuations: the ultrametric value cannot be certified."""

    exit_code = EXIT_PRECISION


class TorsionOrbitError(HeightlabError):
    """A doubling orbit ran into O_E or a 2-torsion point."""

    exit_code = EXIT_VALIDATION


class ReducibleRadicalError(ValidationError):
    """The radicand is a perfect power; reduce the exponent first."""


class UnsupportedConstructionError(ValidationError):
    """Value outside the supported cyclotomic-times-radical inventory."""
