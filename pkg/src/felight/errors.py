"""Exception types raised across the package."""


class FelightError(ValueError):
    """Base class for domain errors."""


class TruncationError(FelightError):
    """Fock-space cutoff too small for the requested state."""


class EmptyPreFilterError(FelightError):
    """Pre-selection window contains no populated sideband."""


class EmptySelectionError(FelightError):
    """Post-selection outcome has zero amplitude everywhere."""


class UnphysicalInputError(FelightError):
    """Coherence-factor input implies negative intensity fluctuations."""


class ResolutionError(FelightError):
    """Quadrature grid too coarse: step-halving check did not converge."""
