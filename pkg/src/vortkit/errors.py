"""Exception types shared across the toolkit."""

from __future__ import annotations


class VortkitError(Exception):
    """Base class for all toolkit errors."""


class InvalidField(VortkitError):
    """Field construction received non-finite or mis-shaped values."""


class GridMismatch(VortkitError):
    """Two fields that must share a grid were built on different grids."""


class GridBudgetExceeded(VortkitError):
    """Requested grid exceeds the configured point budget."""


class DegenerateState(VortkitError):
    """Wavefunction is identically zero; hydrodynamic fields undefined."""


class ConstantLambdaForbidden(VortkitError):
    """A spatially uniform vorticity eigenvalue was supplied where a
    non-constant one is required (a uniform eigenvalue makes the control
    field stationary, so no time-varying vector potential exists)."""


class LogDomainError(VortkitError):
    """log of a non-positive eigenvalue field was explicitly requested."""


class ChargeZero(VortkitError):
    """Operation requires a non-zero particle charge."""


class SolverDiverged(VortkitError):
    """Iterative solve failed to reach tolerance.

    Attributes
    ----------
    residuals : list of float
        Residual history, one entry per iteration.
    suggestion : str or None
        Remedial hint (e.g. reduce mixing) when a failure pattern was
        recognised.
    """

    def __init__(self, message, residuals=None, suggestion=None):
        super().__init__(message)
        self.residuals = list(residuals) if residuals is not None else []
        self.suggestion = suggestion


class EigenSolverFailed(VortkitError):
    """Eigensolver did not reach the requested residual tolerance.

    Carries the same ``residuals`` / ``suggestion`` attributes as
    SolverDiverged so callers can treat both failure kinds uniformly.
    """

    def __init__(self, message, residuals=None, suggestion=None):
        super().__init__(message)
        self.residuals = list(residuals) if residuals is not None else []
        self.suggestion = suggestion


class ParseError(VortkitError):
    """Malformed field expression.

    Attributes
    ----------
    position : int
        Character offset of the offending token (0-based).
    expected : str
        Description of what the parser was looking for.
    found : str
        The token text actually present (empty string at end of input).
    """

    def __init__(self, position, expected, found):
        self.position = position
        self.expected = expected
        self.found = found
        shown = repr(found) if found else "end of input"
        super().__init__(f"parse error at offset {position}: expected {expected}, found {shown}")


class EvalDomainError(VortkitError):
    """Expression evaluation produced non-finite values at some grid points.

    Attributes
    ----------
    bad_points : int
        Number of grid points with non-finite results.
    """

    def __init__(self, message, bad_points):
        super().__init__(message)
        self.bad_points = bad_points


class ConfigError(VortkitError):
    """Scenario configuration failed validation.

    Attributes
    ----------
    failures : list of str
        Every validation failure found, not just the first.
    """

    def __init__(self, failures):
        self.failures = list(failures)
        super().__init__(
            "configuration invalid ({} problem{}):\n".format(
                len(self.failures), "" if len(self.failures) == 1 else "s"
            )
            + "\n".join("  - " + f for f in self.failures)
        )
