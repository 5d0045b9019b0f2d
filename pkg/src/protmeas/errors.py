"""Exception types raised by the toolkit."""


class DomainError(ValueError):
    """Base class for violations of a physical or numerical precondition."""


class DimensionMismatch(DomainError):
    pass


class NotHermitian(DomainError):
    pass


class InvalidState(DomainError):
    pass


class DegenerateSpectrum(DomainError):
    """The Hamiltonian has (numerically) coinciding eigenvalues.

    Protective measurement needs a non-degenerate spectrum, so this is
    refused instead of silently picking an eigenbasis.
    """


class NonPositiveDispersion(DomainError):
    pass


class BlochVectorTooLong(DomainError):
    pass


class NonUnitAxis(DomainError):
    pass


class AmbiguousBranch(DomainError):
    pass


class DegenerateSampleCloud(DomainError):
    pass


class ConfigInvalid(Exception):
    """Run configuration failed to parse or validate.

    ``field`` names the offending entry, dotted for nested keys.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
