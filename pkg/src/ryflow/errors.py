"""Exception types raised by the simulator."""


class RegimeError(ValueError):
    """Flow coefficients outside alpha > 0, beta > -alpha/(n-1)."""


class InvalidStateError(ValueError):
    """Grid state is malformed or contains non-finite values."""


class UnsupportedDimensionError(ValueError):
    pass


class DegenerateMetricError(ValueError):
    """A warped-product profile dropped below the positivity floor.

    ``index`` is the grid location of the offending minimum and ``value`` the
    minimum itself; a vanishing ``psi`` at an isolated point is a neckpinch.
    """

    def __init__(self, field, index, value):
        self.field = field
        self.index = int(index)
        self.value = float(value)
        super().__init__(
            f"degenerate metric: min {field} = {value:.3e} at grid index {index}"
        )


class InvalidCurvatureError(ValueError):
    """Curvature array violates the algebraic curvature symmetries."""

    def __init__(self, message, violation):
        self.violation = float(violation)
        super().__init__(f"{message} (max violation {violation:.3e})")
