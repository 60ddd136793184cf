"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """Arguments violate an operation's preconditions."""


class UndefinedFeature(ValueError):
    """A feature or embedding has zero norm and cannot be normalized."""


class BudgetExhausted(RuntimeError):
    """The oracle's query budget is used up. Attack loops treat this as a stop signal."""


class NoFace(ValueError):
    """The posed face covers no pixel of the frame."""


class InitFailed(RuntimeError):
    """No adversarial starting point was found."""
