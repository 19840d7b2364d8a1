"""Exception hierarchy shared by every module."""


class SubmatroidError(Exception):
    """Base class for all package errors."""


class DomainError(SubmatroidError, ValueError):
    """An element identifier outside the ground set."""


class PreconditionError(SubmatroidError, ValueError):
    """An operation was called with arguments violating its precondition."""


class InputError(SubmatroidError, ValueError):
    """Malformed user input: bad parameters, permutations, traces."""


class MatroidAxiomError(SubmatroidError, ValueError):
    """An independence family that is not a matroid."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class RankInconsistencyError(SubmatroidError, RuntimeError):
    """Greedy ran out of eligible elements before reaching the rank."""


class EmptyInstanceError(InputError):
    """A partition instance with no users or no resources."""


class ValidationError(SubmatroidError, ValueError):
    """A valuation oracle that is not monotone submodular."""


class ResourceCapError(SubmatroidError, RuntimeError):
    """An exhaustive enumeration would exceed its configured cap."""

    def __init__(self, message, count=None, cap=None):
        super().__init__(message)
        self.count = count
        self.cap = cap


class InstanceFormatError(InputError):
    """An instance file that does not parse; ``path`` locates the offending field."""

    def __init__(self, message, path="$"):
        super().__init__(f"{path}: {message}")
        self.path = path
