class ChainforgeError(Exception):
    """Base class for all library errors."""


class ConfigurationError(ChainforgeError):
    """An input object violates a structural precondition."""


class AlphabetMismatch(ChainforgeError):
    pass


class NonConvergence(ChainforgeError):
    """An iterative closure did not reach its fixpoint."""

    def __init__(self, message, last):
        super().__init__(message)
        self.last = last


class ChainValidationError(ChainforgeError):
    """A chain failed a structural check; ``index`` names the offending position."""

    def __init__(self, message, check, index):
        super().__init__(message)
        self.check = check
        self.index = index


class SearchBudgetExceeded(ChainforgeError):
    pass
