"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Matrix has the wrong shape (odd size, mismatched blocks, ...)."""


class SymmetryError(ValueError):
    """A matrix expected to be symmetric is not."""


class FrameError(ValueError):
    """A subspace frame is rank deficient or not Lagrangian."""


class DomainError(ValueError):
    """Parameters fall outside the admissible domain of a normal form."""


class UnsupportedInputError(ValueError):
    """No method is available for the given input."""


class HypothesisError(ValueError):
    """A lemma-specific hypothesis (e.g. definiteness of a block) fails."""


class RefinementNeeded(RuntimeError):
    """Path sampling is too coarse to resolve the crossings unambiguously."""


class InstabilityError(RuntimeError):
    """A limiting quantity did not stabilise before the step size underflowed."""


class IntegrationError(RuntimeError):
    """ODE integration violated its energy or symplecticity budget."""
