from __future__ import annotations

from dataclasses import dataclass

from ryflow.errors import RegimeError


@dataclass(frozen=True)
class FlowParams:
    """Coefficients of dg/dt = -2 alpha Ric - beta R g on an n-manifold.

    Unless ``allow_degenerate`` is set, construction enforces the parabolic
    regime alpha > 0 and beta > -alpha/(dim - 1).
    """

    alpha: float
    beta: float
    dim: int
    allow_degenerate: bool = False

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise ValueError(f"dim must be an integer >= 2, got {self.dim}")
        if not self.allow_degenerate:
            if not self.alpha > 0:
                raise RegimeError(
                    f"regime condition violated: need alpha > 0, got alpha={self.alpha}"
                )
            bound = -self.alpha / (self.dim - 1)
            if not self.beta > bound:
                raise RegimeError(
                    "regime condition violated: need beta > -alpha/(n-1) = "
                    f"{bound:.17g}, got beta={self.beta}"
                )

    @property
    def trace_speed(self) -> float:
        """alpha + (n-1) beta, the diffusivity of the scalar curvature."""
        return self.alpha + (self.dim - 1) * self.beta

    @property
    def max_diffusivity(self) -> float:
        """Largest eigenvalue of the principal symbol, max(alpha, alpha+(n-1)beta)."""
        return max(self.alpha, self.trace_speed)

    @property
    def in_regime(self) -> bool:
        return self.alpha > 0 and self.trace_speed > 0
