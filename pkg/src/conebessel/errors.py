"""Exception types shared across the package.

The CLI maps these onto exit codes: UsageError -> 2, everything else
derived from ConeBesselError -> 1.
"""


class ConeBesselError(Exception):
    """Base class for all computation errors raised by this package."""


class UsageError(ConeBesselError):
    """Caller passed inconsistent or incomplete arguments."""


class AlgebraMismatchError(UsageError):
    """Two elements from different algebras were combined."""


class UnsupportedAlgebraError(ConeBesselError):
    """The descriptor has no concrete matrix backing (series-only d)."""


class SingularElementError(ConeBesselError):
    """Inverse of a (near-)singular element was requested."""

    def __init__(self, abs_det, message=None):
        self.abs_det = abs_det
        super().__init__(message or f"element is numerically singular (|det| = {abs_det:.3e})")


class DomainError(ConeBesselError):
    """Input lies outside the mathematical domain of the operation."""


class NonGenericParameterError(ConeBesselError):
    """An order/multiplicity combination puts a gamma-function argument on
    (or too close to) a non-positive integer, where the series degenerate."""

    def __init__(self, argument, value, message=None):
        self.argument = argument
        self.value = value
        super().__init__(
            message
            or f"non-generic parameters: gamma argument {argument} = {value:.6g} "
            "is within the pole guard of a non-positive integer"
        )


class NoConvergenceError(ConeBesselError):
    """Series truncation cap was reached before the layer sums settled.

    Carries the partial value so callers can inspect how far the sum got.
    """

    def __init__(self, partial, err, work, message=None):
        self.partial = partial
        self.err = err
        self.work = work
        super().__init__(
            message
            or f"series did not converge within the degree cap (partial sum {partial:.6g}, "
            f"last layer {err:.3e}, {work} terms)"
        )


class IllConditionedPointError(ConeBesselError):
    """Evaluation point too close to a singular configuration (e.g. nearly
    coincident coordinates in the divided-difference operator)."""
