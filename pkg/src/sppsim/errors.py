class DomainError(ValueError):
    """Input outside the domain where a formula is defined."""


class ResolutionWarning(UserWarning):
    """Sampling too coarse to resolve a feature; result is still returned."""
