"""Exception types shared across the package."""


class DimensionMismatch(ValueError):
    """Array arguments disagree on a shared dimension."""


class NotPSD(ValueError):
    """A matrix required to be positive semidefinite is not."""


class ZeroDistance(ValueError):
    """A propagation distance must be strictly positive."""


class SingularSystem(RuntimeError):
    """A linear system that should be solvable is numerically singular."""


class NonConvergence(RuntimeError):
    """An iterative solver exhausted its iteration budget."""


class MemoryGuard(RuntimeError):
    """Problem size would exceed the configured memory cap."""


class NonSquare(ValueError):
    """A square matrix was required."""


class IndivisibleGroups(ValueError):
    """Matrix size is not divisible by the requested group size."""


class ParseError(ValueError):
    """Configuration input could not be parsed."""


class ValidationError(ValueError):
    """Configuration value out of range or inconsistent."""
