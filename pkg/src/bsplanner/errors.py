"""Exception types shared across the planner."""


class PlannerError(Exception):
    """Base class for all planner errors."""


class InvalidInputError(PlannerError):
    """Malformed or out-of-contract input (bad scenario file, non-finite points, ...)."""


class PreconditionError(PlannerError):
    """An operation was called outside its documented precondition."""


class NoPathError(PlannerError):
    """Graph search could not connect start and goal."""


class DegenerateDirectionError(PlannerError):
    """Anchor direction is undefined (crossing point coincides with the control point)."""


class AnchorFallbackError(PlannerError):
    """No plane crossing of the guide path was found for an in-collision control point."""


class PlanningFailedError(PlannerError):
    """Optimization exhausted its anchor rounds with collisions remaining.

    Carries the best iterate so callers can inspect or render it.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
