"""Exception types shared across the package."""


class RevanonError(Exception):
    """Base class for all package-specific errors."""


class FormatError(RevanonError, ValueError):
    """A file or string could not be parsed (bad magic, truncation, syntax)."""


class DimsMismatchError(RevanonError, ValueError):
    """Two objects that must share geometry (key/latent/mask/image) do not."""


class NumericError(RevanonError, ArithmeticError):
    """A latent became non-finite; usually signals a predictor blow-up."""
