"""Exception types shared across the package."""


class SymmetryError(RuntimeError):
    """Amplitudes that must stay equal by symmetry drifted apart.

    Raised by the brute-force simulator; it always indicates a bug in the
    simulator or in the operator being applied, never a user error.
    """


class BoundError(AssertionError):
    """A numerically checked identity or bound does not hold."""
