"""Exception types shared across the package."""


class ContractViolationError(ValueError):
    """An input violates a structural precondition (shape, hermiticity, positivity)."""


class AlgebraMismatchError(ContractViolationError):
    """Operands live on different algebras."""


class DomainError(ValueError):
    """A scalar function was evaluated outside its admissible domain."""


class DegenerateStateError(ValueError):
    """A sampled state fell into the fixed-point set (entropy denominator below floor)."""
