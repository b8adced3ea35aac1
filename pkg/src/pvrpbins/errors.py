"""Exception types raised by the solver toolkit."""


class ProblemError(ValueError):
    """Base class for invalid problem data or solutions."""


class UnvisitedPointError(ProblemError):
    """A collection point is never visited, so no cyclic steady state exists."""

    def __init__(self, point):
        super().__init__(f"unvisited point: {point}")
        self.point = point


class PointUnservableError(ProblemError):
    """Even daily visits cannot keep a point below the largest bin capacity."""

    def __init__(self, point, peak, limit):
        super().__init__(
            f"point unservable: point {point} accumulates {peak:.4f} m3 "
            f"with daily visits, limit is {limit:.4f} m3")
        self.point = point


class CapacityExceededError(ProblemError):
    """No bin combination can hold the accumulated waste."""


class PickupExceedsVehicleError(ProblemError):
    """A single pickup is larger than the vehicle capacity."""


class ShiftFormulaUndefined(ProblemError):
    """The derived shift length needs at least two vehicles."""


class InstanceFormatError(ProblemError):
    """An instance file is malformed."""


class StaleSolutionError(ProblemError):
    """A solution file's summary disagrees with re-decoding its chromosome."""


class SearchTooLargeError(ProblemError):
    """The exhaustive oracle refuses an instance above its state cap."""


class SolutionFormatError(ProblemError):
    """A solution file does not follow the expected schema."""
