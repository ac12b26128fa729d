"""Exception hierarchy shared by all grushinlab modules."""


class GrushinLabError(Exception):
    """Base class for every error raised by the toolkit."""


class DomainError(GrushinLabError, ValueError):
    """Evaluation point outside the domain of a frame function."""


class SingularityError(GrushinLabError, ValueError):
    """Evaluation on (or within 1e-8 of) the singular set Z = {f = 0}."""


class ParameterError(GrushinLabError, ValueError):
    """Inconsistent numerical parameters (step sizes, final times, ranges)."""


class InconclusiveError(GrushinLabError):
    """A numerical oracle could not reach a verdict (e.g. a bad power-law fit)."""


class UndecidableError(GrushinLabError):
    """Classification input lies inside the boundary band around k = 3/4."""


class ComplexIndicialError(GrushinLabError, ValueError):
    """The indicial polynomial has complex roots (4*g2 + 1 < 0)."""


class OutOfRangeError(GrushinLabError, ValueError):
    """Parameter outside the range where an expansion or theorem applies."""


class ModeCouplingError(GrushinLabError):
    """Fourier modes requested for a y-dependent profile, where they couple."""


class UnsupportedPotentialError(GrushinLabError):
    """Potential outside the catalog handled by an analytic criterion."""
