"""Exception types raised across the household MPC library."""


class HouseholdMpcError(Exception):
    """Root of every error raised on purpose by this package."""


class ConfigError(HouseholdMpcError, ValueError):
    """Raised for an invalid or incomplete configuration document."""


class ModelError(HouseholdMpcError, ValueError):
    """Raised for invalid building data or a malformed state-space model."""


class LpFormatError(HouseholdMpcError, ValueError):
    """Raised when a linear program is structurally invalid."""


class ScenarioFormatError(HouseholdMpcError, ValueError):
    """Raised when a time-series file cannot be ingested.

    Carries the offending file, the 1-based line and the column name so the
    message points at the exact cell.
    """

    def __init__(self, path, line, column, message):
        self.path = str(path)
        self.line = line
        self.column = column
        self.reason = message
        super().__init__(
            "%s:%s: column %r: %s" % (self.path, line if line is not None else "-", column, message)
        )


class NoFeasibleStartError(HouseholdMpcError):
    """Raised when a load window holds no run of consecutive permitted periods."""

    def __init__(self, load_name, cycle_len):
        self.load_name = load_name
        self.cycle_len = cycle_len
        super().__init__(
            "load %r: window contains no %d consecutive permitted periods"
            % (load_name, cycle_len)
        )


class InfeasibleHorizonError(HouseholdMpcError):
    """Raised when the continuous horizon subproblem has no optimal solution."""

    def __init__(self, status, message=""):
        self.status = status
        super().__init__("horizon LP ended with status %s%s" % (
            status, (": " + message) if message else ""))


class SolverError(HouseholdMpcError):
    """Raised when the simplex stops without a trustworthy answer.

    Covers the iteration cap and a basis that could not be factorized or
    kept primal feasible after refactorization.
    """

    def __init__(self, status, message=""):
        self.status = status
        super().__init__("LP solver stopped with status %s%s" % (
            status, (": " + message) if message else ""))


class OracleLimitError(HouseholdMpcError):
    """Raised when exhaustive enumeration would exceed its combination cap."""


class DaySolveError(HouseholdMpcError):
    """Raised by the receding-horizon loop, tagging the failing day."""

    def __init__(self, day, cause):
        self.day = day
        self.cause = cause
        super().__init__("day %d: %s" % (day, cause))
