"""Exception types raised by dsst."""


class InvalidArgument(ValueError):
    """An argument violates a documented precondition."""


class ReconstructionCoverageError(InvalidArgument):
    """Overlap-add left an in-range output sample without any window coverage."""


class NoRidgeError(InvalidArgument):
    """Ridge extraction was asked to track a matrix with no energy."""
