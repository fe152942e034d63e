"""Exception types shared across the package."""


class PrecisionError(RuntimeError):
    """A numerical routine could not meet its accuracy contract.

    Raised by kernel evaluations whose truncation bound exceeds the
    requested tolerance, by Monte-Carlo integrators whose error estimate
    is too large, and by quadratures that exhaust their node budget.
    The message carries a concrete hint (required degree, sample size).
    """


class GridRangeError(ValueError):
    """A point lies beyond the last computed dyadic radius.

    Recompute the grid with a larger depth to index such points.
    """
