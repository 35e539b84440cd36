"""Exception hierarchy with stable machine-readable codes.

Every failure mode the CLI can hit maps to one exception class, each with
a short `code` string (emitted in the JSON error blob on stderr) and a
distinct process exit code. Library users catch `ClockSimError`.
"""


class ClockSimError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"
    exit_code = 1


class ConfigError(ClockSimError, ValueError):
    """Configuration parse or validation failure, with a field path."""

    code = "config"
    exit_code = 2

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}")


class ParameterError(ClockSimError, ValueError):
    """A physical argument violates an operation's precondition."""

    code = "invalid_parameter"
    exit_code = 3


class InfeasibleTransportError(ClockSimError):
    """State-selective transport criteria cannot be met; carries the report."""

    code = "infeasible_transport"
    exit_code = 4

    def __init__(self, message, report=None):
        self.report = report
        super().__init__(message)


class UntrappedError(ClockSimError):
    """Zero or negative well depth where a bound atom is required."""

    code = "untrapped"
    exit_code = 5


class NoInteractionError(ClockSimError):
    """Vanishing collisional energy, so no phase gate is possible."""

    code = "no_interaction"
    exit_code = 6


class DegenerateFringeError(ClockSimError):
    """Flat fringe (zero contrast), so phase sensitivity is undefined."""

    code = "degenerate_fringe"
    exit_code = 7


class CapacityError(ClockSimError):
    """Register size exceeds the configured backend capacity."""

    code = "register_capacity"
    exit_code = 8
