"""Exceptions shared across the package."""


class InvalidInput(ValueError):
    """An argument violates an operation's precondition."""


class SingularScale(InvalidInput):
    """A change of variable whose scale ball contains zero."""


class CapExceeded(InvalidInput):
    """A request exceeds a configured feasibility cap."""


class OutOfHypothesis(InvalidInput):
    """Bound-propagation input outside the range where the bound is proven."""


class Refuted(ArithmeticError):
    """A certified check came out false."""


class Undecidable(ArithmeticError):
    """A ball straddles a decision threshold at the working precision."""


class NotFound(LookupError):
    """Zero search found no certified sign change."""
