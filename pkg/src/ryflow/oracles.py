"""Closed-form solutions and bounds used as ground truth.

Past-extinction queries are flagged in the return value rather than raised,
so lifetimes can be tabulated over parameter sweeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from ryflow.params import FlowParams


@dataclass(frozen=True)
class EinsteinFamily:
    """g(t) = c(t) g0 with Ric(g0) = lam * g0 and g(0) = c0 * g0."""

    lam: float
    c0: float
    dim: int

    def __post_init__(self):
        if not self.c0 > 0:
            raise ValueError(f"c0 must be positive, got {self.c0}")
        if self.dim < 2:
            raise ValueError("dim must be >= 2")

    @property
    def initial_scalar(self) -> float:
        return self.dim * self.lam / self.c0


def einstein_rate(fam: EinsteinFamily, params: FlowParams) -> float:
    """dc/dt = -lam (2 alpha + n beta)."""
    return -fam.lam * (2.0 * params.alpha + fam.dim * params.beta)


def einstein_scale(fam: EinsteinFamily, params: FlowParams, t: float) -> float:
    """c(t) = c0 - lam (2 alpha + n beta) t. A value <= 0 means t is past extinction."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return fam.c0 + einstein_rate(fam, params) * t


def einstein_extinction_time(fam: EinsteinFamily, params: FlowParams) -> float:
    rate = einstein_rate(fam, params)
    return fam.c0 / -rate if rate < 0 else math.inf


def einstein_scalar(fam: EinsteinFamily, params: FlowParams, t: float) -> float:
    """R(t) = n lam / c(t); inf once the scale has collapsed."""
    c = einstein_scale(fam, params, t)
    return fam.dim * fam.lam / c if c > 0 else math.inf


class ProductSolution(NamedTuple):
    phi: float
    psi: float
    extinct: bool


def product_shrink_rate(params: FlowParams) -> float:
    """-(d psi^2/dt) = (n-2)(2 alpha + (n-1) beta) on S^1 x S^(n-1) product data."""
    n = params.dim
    return (n - 2) * (2.0 * params.alpha + (n - 1) * params.beta)


def product_extinction_time(r0: float, params: FlowParams) -> float:
    c = product_shrink_rate(params)
    return r0**2 / c if c > 0 else math.inf


def product_metric_solution(r0, phi0, params: FlowParams, t) -> ProductSolution:
    """Exact evolution of phi0^2 ds^2 + r0^2 g_sphere.

        psi(t)^2 = r0^2 - (n-2)(2 alpha + (n-1) beta) t
        phi(t)^2 = phi0^2 (psi(t)^2 / r0^2)^(beta (n-1) / (2 alpha + (n-1) beta))

    At or past extinction returns NaN profiles with ``extinct=True``.
    """
    n = params.dim
    if n < 3:
        raise ValueError("product metric solution needs dim >= 3")
    c = product_shrink_rate(params)
    psi2 = r0**2 - c * t
    if psi2 <= 0:
        return ProductSolution(math.nan, math.nan, True)
    denom = 2.0 * params.alpha + (n - 1) * params.beta
    if denom == 0:
        # psi is frozen and d(phi^2)/dt = -beta (n-1)(n-2) phi^2 / r0^2
        phi2 = phi0**2 * math.exp(-params.beta * (n - 1) * (n - 2) * t / r0**2)
    else:
        phi2 = phi0**2 * (psi2 / r0**2) ** (params.beta * (n - 1) / denom)
    return ProductSolution(math.sqrt(phi2), math.sqrt(psi2), False)


def product_metric_rates(phi, psi, params: FlowParams):
    """(d phi^2/dt, d psi^2/dt) of the product reduction at given profile values."""
    n = params.dim
    dphi2 = -params.beta * (n - 1) * (n - 2) * phi**2 / psi**2
    dpsi2 = -product_shrink_rate(params)
    return dphi2, dpsi2


def blow_up_bound(a, params: FlowParams) -> float:
    """Upper bound n(n-1) / ((n-2) a alpha) on the lifetime when R >= a > 0.

    Infinite when a <= 0 or n = 2 (no finite bound is asserted there).
    """
    n = params.dim
    if a <= 0 or n < 3 or params.alpha <= 0:
        return math.inf
    return n * (n - 1) / ((n - 2) * a * params.alpha)


def scalar_min_comparison(a, params: FlowParams, t) -> float:
    """Comparison lower bound n(n-1) a / (n(n-1) - (n-2) a alpha t) for R_min(t).

    Returns inf at or past :func:`blow_up_bound` (flag: no smooth solution can
    survive that long).
    """
    n = params.dim
    if not a > 0 or n < 3:
        raise ValueError("comparison bound needs a > 0 and dim >= 3")
    if t < 0:
        raise ValueError("t must be >= 0")
    denom = n * (n - 1) - (n - 2) * a * params.alpha * t
    if denom <= 0:
        return math.inf
    return n * (n - 1) * a / denom
