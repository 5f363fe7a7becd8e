"""Exception types raised by ugen."""


class UgenError(Exception):
    """Base class for all library errors."""


class InvalidStateError(UgenError, ValueError):
    """An operator is not a valid density matrix (or Bloch vector)."""


class DegenerateOutcomeError(UgenError, ValueError):
    """A measurement outcome has (numerically) zero probability."""


class FamilyMismatchError(UgenError, ValueError):
    """Nonlocal parameters do not belong to the family a construction needs."""


class DomainError(UgenError, ValueError):
    """An input lies outside the compatibility domain of a state family."""


class ParameterError(UgenError, ValueError):
    """Channel or measurement parameters are out of range."""


class ConsistencyError(UgenError, RuntimeError):
    """An internal numerical invariant was violated."""
