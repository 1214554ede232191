"""Exception types shared across the package."""
from __future__ import annotations


class ConfigError(ValueError):
    """Invalid configuration or command-line input."""


class NonFiniteGradientError(RuntimeError):
    """Gradient evaluation produced NaN or infinity.

    Carries the offending point in ``x``.
    """

    def __init__(self, x):
        self.x = x
        super().__init__(f"non-finite gradient at x={x!r}")


class NonConvergenceError(RuntimeError):
    """Iterative minimization did not reach the requested tolerance.

    Carries the best iterate found (``best_x``), its gradient norm
    (``grad_norm``) and the iteration count.
    """

    def __init__(self, best_x, grad_norm, iterations):
        self.best_x = best_x
        self.grad_norm = grad_norm
        self.iterations = iterations
        super().__init__(
            f"no start converged within {iterations} iterations "
            f"(best gradient norm {grad_norm:.3e})"
        )


class RetriesExhaustedError(RuntimeError):
    """A sampling run never ended at the top temperature level.

    ``attempts`` is the number of restarts used; ``final_levels`` maps
    each final level reached to the number of attempts that ended there.
    """

    def __init__(self, attempts, final_levels, message=None):
        self.attempts = attempts
        self.final_levels = dict(final_levels)
        super().__init__(
            message
            or f"no accepted sample after {attempts} attempts; "
            f"final-level histogram {self.final_levels}"
        )


class ReducibleChainError(ValueError):
    """Transition matrix is not irreducible.

    ``closed_classes`` lists the state labels of each closed
    communicating class found.
    """

    def __init__(self, closed_classes):
        self.closed_classes = [list(c) for c in closed_classes]
        super().__init__(
            f"chain is reducible; closed classes: {self.closed_classes}"
        )


class NonReversibleError(ValueError):
    """Operation requires a reversible chain."""


class BoundViolationError(AssertionError):
    """A checked inequality failed.

    Carries ``lhs``/``rhs`` so callers can report the margin.
    """

    def __init__(self, name, lhs, rhs):
        self.name = name
        self.lhs = lhs
        self.rhs = rhs
        super().__init__(f"{name}: {lhs!r} exceeds {rhs!r}")
