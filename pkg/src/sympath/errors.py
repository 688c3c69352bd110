"""Exception types shared across the package."""


class SympathError(Exception):
    """Base class for all package errors."""


class DimensionError(SympathError):
    """Matrix has the wrong shape or exceeds the supported size."""


class ConvergenceError(SympathError):
    """An iterative solver failed to reach its residual target."""

    def __init__(self, message, worst_residual=None):
        super().__init__(message)
        self.worst_residual = worst_residual


class OverflowLimitError(SympathError):
    """Input norm exceeds the safe range of the matrix exponential."""


class SymplecticDefect(SympathError):
    """Matrix fails the symplectic certification."""

    def __init__(self, message, defect=None, det=None, pairing=None):
        super().__init__(message)
        self.defect = defect
        self.det = det
        self.pairing = pairing


class ConstraintError(SympathError):
    """Normal-form parameters cannot be completed consistently."""


class SingularityError(SympathError):
    """A matrix that must be inverted is numerically singular."""


class RealnessError(SympathError):
    """A quantity that must be real carries too large an imaginary part."""


class AmbiguousStratum(SympathError):
    """Spectrum sits within tolerance of several strata."""

    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = list(candidates)


class PositivityViolation(SympathError):
    """A path generator fails positive definiteness."""

    def __init__(self, message, t=None, min_eig=None):
        super().__init__(message)
        self.t = t
        self.min_eig = min_eig


class GridMismatch(SympathError):
    """Two sampled paths could not be brought onto a common grid."""


class GeneratorInconsistency(SympathError):
    """Sampled conjugating family disagrees with its declared generator."""


class NotDecomposable(SympathError):
    """Eigenvalue groups collide; no invariant-subspace splitting exists."""


class ConditioningError(SympathError):
    """Subspace or basis construction is too ill-conditioned to trust."""


class MonotonicityError(SympathError):
    """Reparametrization is not strictly increasing."""


class UnknownCheck(SympathError):
    """Requested named verification does not exist."""
