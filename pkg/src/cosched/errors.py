"""
Exception hierarchy for cosched.

Every error knows the process exit status the command line reports for it:
0 ok, 2 validation, 3 infeasible, 4 limits, 5 internal.
"""
from typing import Any, Optional


class CoschedError(Exception):
    """Base class for all errors raised by the package."""

    exit_code = 5


class ModelError(CoschedError, ValueError):
    """Malformed optimization model (unknown variable, duplicate name, ...)."""


class SchemaError(CoschedError):
    """An instance document is missing a field, has a mistyped one or an unknown key."""

    exit_code = 2

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class ConsistencyError(CoschedError):
    """An instance document is well-formed but its parts do not fit together."""

    exit_code = 2

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class InfeasibleSchedule(CoschedError):
    """A schedule or dispatch breaks a plant constraint at a given hour."""

    exit_code = 2

    def __init__(self, constraint: str, hour: int, message: str):
        self.constraint = constraint
        self.hour = hour
        super().__init__(f"[{constraint}] hour {hour}: {message}")


class DomainError(CoschedError, ValueError):
    """A special function was called outside its domain."""


class EmptySample(CoschedError, ValueError):
    """Moment estimation was asked for an empty sample."""


class NumericalFailure(CoschedError):
    """The simplex hit its pivot limit or lost numerical stability."""


class NodeLimitExceeded(CoschedError):
    """Branch-and-bound exhausted its node budget before proving optimality."""

    exit_code = 4

    def __init__(self, nodes: int, incumbent: Optional[Any] = None):
        self.nodes = nodes
        self.incumbent = incumbent
        super().__init__(f"node limit reached after {nodes} nodes")


class UnboundedSet(CoschedError):
    """Vertex enumeration was handed an unbounded polyhedron."""


class SplitError(CoschedError):
    """A DDU couples to both decision stages or to the wrong one."""

    exit_code = 2


class OracleFailure(CoschedError):
    """The sub-problem oracle could not solve one of its inner LPs."""


class IterationLimitExceeded(CoschedError):
    """The DDCCG loop hit its iteration cap; carries the best incumbent and the trace."""

    exit_code = 4

    def __init__(self, iterations: int, incumbent: Any = None, trace: Any = None):
        self.iterations = iterations
        self.incumbent = incumbent
        self.trace = trace
        super().__init__(f"iteration limit reached after {iterations} iterations")


class InfeasibleInstance(CoschedError):
    """The master problem has no feasible first-stage decision."""

    exit_code = 3


class MissingHour(CoschedError):
    """A history bundle has no data for an hour of the horizon."""

    exit_code = 2

    def __init__(self, hour: int, what: str):
        self.hour = hour
        super().__init__(f"no {what} data for hour {hour}")


class TooLargeForOracle(CoschedError):
    """The brute-force oracle refuses instances with too many first-stage binaries."""

    exit_code = 4


class MissingRun(CoschedError):
    """A report was requested for a run directory without results."""

    exit_code = 2
