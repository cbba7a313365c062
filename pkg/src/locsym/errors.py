"""Exception types shared across the locsym modules."""


class ChainError(ValueError):
    """Invalid chain, domain or configuration content."""


class ConfigError(ChainError):
    """A configuration document could not be parsed or validated."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


class ConvergenceError(ArithmeticError):
    """Iterative eigensolver exceeded its iteration budget."""


class DegenerateEigenvalue(ArithmeticError):
    """The eigenvalue is (numerically) degenerate; closed-form components are undefined."""


class DegenerateSpectrum(ArithmeticError):
    """A spectrum contains degenerate levels where a nondegenerate one is required."""


class ZeroPivot(UserWarning):
    """Sign recovery hit a broken recurrence and restarted the sign chain."""


class UnsupportedDegeneracy(ValueError):
    """On-site degeneracy pattern outside the adjacent-pair case."""

    def __init__(self, message, sites=()):
        self.sites = tuple(sites)
        super().__init__(message)


class DegenerateSite(ValueError):
    """A nondegenerate-series operation was asked for a site in a degenerate pair."""


class NotAdjacentDegenerate(ValueError):
    """The requested sites are not an adjacent pair with equal on-site energy."""


class TrackingAmbiguity(ArithmeticError):
    """Two eigenvalue tracks met away from the origin of a sweep."""

    def __init__(self, message, eps_c=None):
        self.eps_c = eps_c
        super().__init__(message)
