"""Exception types shared across the package."""


class SymrigError(Exception):
    pass


# -- barcode ---------------------------------------------------------------

class InvalidPresentation(SymrigError):
    """Zigzag presentation data with inconsistent shapes."""


class MixedDirectionBar(SymrigError):
    """A bar whose two finite ends carry opposite conormal directions."""


class EmptySequence(SymrigError):
    pass


# -- cones -----------------------------------------------------------------

class ZeroCovector(SymrigError):
    pass


class InvalidRegionParameters(SymrigError):
    pass


class InconsistentConeDescription(SymrigError):
    """H- and V-descriptions of a polyhedral cone disagree."""


# -- convolution -----------------------------------------------------------

class DimensionMismatch(SymrigError):
    pass


# -- degree ----------------------------------------------------------------

class NearCriticalValue(SymrigError):
    """A located preimage has a near-singular Jacobian."""


class PropernessViolation(SymrigError):
    """The image of the search-window boundary enters the target ball."""


class HypothesisUnverified(SymrigError):
    """A sampled closeness hypothesis failed, so degrees are not compared."""


class WindowBoundViolated(SymrigError):
    pass


# -- symplectic ------------------------------------------------------------

class OddDimension(SymrigError):
    pass


class RankDeficientBasis(SymrigError):
    pass


class ZeroSigma(SymrigError):
    pass


class NotLagrangian(SymrigError):
    pass


class SingularDifferential(SymrigError):
    pass


class PreconditionViolated(SymrigError):
    """Carries the name of the failing inequality."""


class DegenerateOmegaT(SymrigError):
    """The interpolated 2-form degenerated; input too far from symplectic."""


class MollificationTooCoarse(SymrigError):
    pass


class GraphConditionFailed(SymrigError):
    """No generating-function chart exists on the working ball."""


class BlendWidthNotFound(SymrigError):
    pass


class DegenerateGF(SymrigError):
    pass


# -- bench -----------------------------------------------------------------

class GateFailure(SymrigError):
    def __init__(self, step, message=""):
        self.step = step
        super().__init__(f"gate failure at step {step!r}" + (f": {message}" if message else ""))


class NumericBudgetExceeded(SymrigError):
    pass


class IoFailure(SymrigError):
    pass


class UnknownStep(SymrigError):
    pass
