"""Exception hierarchy shared by the solvers and the command line."""


class SubarrayError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(SubarrayError, ValueError):
    pass


class RankDeficiencyError(SubarrayError):
    """A least-squares system was numerically rank deficient."""

    def __init__(self, rank: int, cols: int, message: str | None = None):
        self.rank = rank
        self.cols = cols
        super().__init__(message or f"rank-deficient system: rank {rank} < {cols} columns")


class PatternGenerationError(SubarrayError):
    pass


class PatternFileError(SubarrayError):
    pass


class RefinementError(SubarrayError):
    pass


class InfeasibleError(SubarrayError):
    """A mode-2 threshold could not be met; ``best`` carries the best attempt."""

    def __init__(self, message: str, best=None, best_residual: float | None = None):
        super().__init__(message)
        self.best = best
        self.best_residual = best_residual


class ResultFormatError(SubarrayError):
    pass
