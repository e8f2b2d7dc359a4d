"""Exception hierarchy shared by all torusdyn modules."""


class TorusDynError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatchError(TorusDynError):
    """Operands live on tori of different dimension."""


class UnsupportedDimensionError(TorusDynError):
    """Requested dimension outside the supported range."""


class NotUnimodularError(TorusDynError):
    """Integer matrix with |det| != 1 cannot define a toral automorphism."""


class ClassificationAmbiguityError(TorusDynError):
    """Numeric and algebraic spectral classifications disagree."""

    def __init__(self, message, numeric=None, algebraic=None):
        super().__init__(message)
        self.numeric = numeric
        self.algebraic = algebraic


class NoUnstableDirectionError(TorusDynError):
    """Operation requires a nontrivial unstable subspace."""


class InversionError(TorusDynError):
    """Newton solve for the inverse map did not converge."""


class InvertibilityMarginError(TorusDynError):
    """Perturbation amplitude too large for guaranteed invertibility."""


class LeafBudgetError(TorusDynError):
    """Leaf refinement exceeded the vertex cap."""

    def __init__(self, cap, step):
        super().__init__(
            f"leaf vertex cap {cap} exceeded at step {step}"
        )
        self.cap = cap
        self.step = step


class ProbeBudgetError(TorusDynError):
    """Density probe exceeded its cell or sample budget."""


class SupportWrapError(TorusDynError):
    """Bump support would wrap around the torus."""


class ConfigError(TorusDynError):
    """Experiment configuration is invalid."""


class NonConvergedError(TorusDynError):
    """Estimate flagged non-converged, escalated by strict mode."""
