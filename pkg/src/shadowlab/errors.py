"""Exception types shared across the package."""


class ShadowlabError(Exception):
    """Base class for all shadowlab errors."""


class GridMismatch(ShadowlabError):
    """Horizon is not an integer multiple of the time step."""


class NonFiniteState(ShadowlabError):
    """A state or Jacobian evaluation produced NaN/Inf (blow-up or bad dt)."""


class UnknownWindow(ShadowlabError):
    """Window label is not one of the built-in windows."""


class NotPositiveDefinite(ShadowlabError):
    """A pivot block failed its Cholesky factorization."""


class SolverFailure(ShadowlabError):
    """A shadowing solve could not be completed."""


class ConfigError(ShadowlabError):
    """Invalid experiment configuration."""
