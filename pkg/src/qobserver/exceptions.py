"""Exception hierarchy.

Numerical failures, infeasible synthesis and configuration problems are kept
apart so the command line front end can map them onto distinct exit codes.
"""


class QObserverError(Exception):
    """Base class for all package errors."""


class NumericalError(QObserverError):
    """A numerical kernel could not produce a trustworthy answer."""


class NotHurwitz(NumericalError):
    """A matrix required to be strictly stable is not."""


class SingularSystem(NumericalError):
    """A linear system is numerically singular."""


class NonFinite(NumericalError):
    """An integration produced non-finite entries."""


class NoStabilizingSolution(NumericalError):
    """A Riccati equation has no stabilizing (or no admissible) solution."""


class Diverged(NoStabilizingSolution):
    """ODE fallback did not reach stationarity within the horizon."""


class RiskSingular(NumericalError):
    """``I - mu N V`` is singular for the risk-sensitive observer."""


class InfeasibleSynthesis(QObserverError):
    """The robust observer hypotheses fail for the given tuning."""

    def __init__(self, message, equation=None, residual=None):
        super().__init__(message)
        self.equation = equation
        self.residual = residual


class InfeasibleP1(InfeasibleSynthesis):
    pass


class InfeasibleP2(InfeasibleSynthesis):
    pass


class AllInfeasible(InfeasibleSynthesis):
    """No ``eps1`` in the search range yields a feasible synthesis."""


class ConfigError(QObserverError):
    """Malformed configuration file."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno
