"""
Exception hierarchy for cmvkit.
"""


class CMVKitError(Exception):
    """Base class for all cmvkit errors"""


class NotAContraction(CMVKitError):
    """Operator norm exceeds 1 beyond the contraction tolerance"""


class NonSquare(CMVKitError):
    """A square matrix was required"""


class TagMismatch(CMVKitError):
    """Supplied contraction tag disagrees with the computed classification"""


class InvalidSequence(CMVKitError):
    """Choice sequence violates its shape, contraction or termination rules"""


class SemiInfiniteSequence(InvalidSequence):
    """Choice sequence has no finite unitary CMV matrix"""


class BadDims(CMVKitError):
    """Requested dimensions are impossible"""


class OutsideDisk(CMVKitError):
    """Evaluation point is not in the open unit disk"""


class SolveFailure(CMVKitError):
    """Linear solve failed (I - lambda*A is numerically singular)"""


class DepthExhausted(CMVKitError):
    """Not enough Taylor coefficients for the requested depth"""


class ShapeMismatch(CMVKitError):
    """Operand shapes are inconsistent"""


class NotNormalized(CMVKitError):
    """Caratheodory function or measure is not normalized"""


class NotConservative(CMVKitError):
    """System block matrix is not unitary"""


class NotSimple(CMVKitError):
    """System (or contraction) has a nontrivial unitary part"""


class PowerBudgetExceeded(CMVKitError):
    """Requested power exceeds what the finite CMV certifies"""


class NotUnitary(CMVKitError):
    """A unitary matrix was required"""


class NotCyclic(CMVKitError):
    """Subspace is not cyclic for the operator"""
