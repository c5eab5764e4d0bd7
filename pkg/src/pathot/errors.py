"""Exception types raised across the package."""


class ContractViolation(ValueError):
    """An operation was called outside its precondition."""


class NoPath(ContractViolation):
    """Alice and Bob are not connected in the topology."""


class NotALink(ContractViolation):
    """A link operation was requested between non-adjacent nodes."""


class Deadlock(RuntimeError):
    """The round scheduler stopped making progress before all processes finished."""


class EnumerationBound(RuntimeError):
    """Exhaustive tape enumeration would exceed the configured leaf bound."""


class RefusesToBruteForce(RuntimeError):
    """The group is too large for brute-force discrete logarithms."""


class NotSeparating(ContractViolation):
    """The corruption set does not separate Alice from Bob."""


class ConfigError(ValueError):
    """Malformed experiment configuration.  ``field`` names the offending JSON path."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class Abort(Exception):
    """A tamper check found an opened run inconsistent with the OT relation."""

    def __init__(self, run_index: int):
        super().__init__(f"opened run {run_index} is inconsistent")
        self.run_index = run_index
