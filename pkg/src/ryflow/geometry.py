"""Curvature of the two symmetry-reduced metric families, plus pointwise
algebraic curvature tools (Hamilton's B tensor, Weyl tensor).

Conventions
-----------
Curvature tensors are stored in an orthonormal frame with the sign fixed so
that a space form of sectional curvature K reads

    R_ijkl = K (d_ik d_jl - d_il d_jk),

Ricci is the contraction R_ik = sum_j R_ijkj and the round unit n-sphere has
R = n(n-1). All norms are full squared frame sums.

Grids are uniform and periodic with spacing h = 2 pi / N; derivatives are
second-order central differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ryflow.errors import (
    DegenerateMetricError,
    InvalidCurvatureError,
    InvalidStateError,
    UnsupportedDimensionError,
)

POSITIVITY_FLOOR = 1e-8


# ---------------------------------------------------------------------------
# periodic finite differences


def d1(f, h, axis=-1):
    return (np.roll(f, -1, axis=axis) - np.roll(f, 1, axis=axis)) / (2.0 * h)


def d2(f, h, axis=-1):
    return (np.roll(f, -1, axis=axis) - 2.0 * f + np.roll(f, 1, axis=axis)) / (h * h)


def flat_laplacian(u, h):
    """Five-point periodic Laplacian on an N x N grid."""
    return d2(u, h, axis=0) + d2(u, h, axis=1)


def grid_points(n):
    """Cell-vertex coordinates 0, h, ..., (N-1) h of the periodic circle."""
    return 2.0 * np.pi * np.arange(n) / n


# ---------------------------------------------------------------------------
# states


@dataclass(frozen=True)
class ConformalTorusState:
    """Metric g = exp(2u) g_flat on the torus [0, 2pi)^2."""

    u: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise InvalidStateError(f"u must be a square N x N grid, got shape {u.shape}")
        n = u.shape[0]
        if n < 8 or n % 2:
            raise InvalidStateError(f"grid size N must be even and >= 8, got {n}")
        object.__setattr__(self, "u", u)

    @property
    def n(self) -> int:
        return self.u.shape[0]

    @property
    def h(self) -> float:
        return 2.0 * np.pi / self.n

    @property
    def dim(self) -> int:
        return 2

    def volume(self) -> float:
        return float(np.sum(np.exp(2.0 * self.u)) * self.h**2)

    def with_u(self, u, t):
        return ConformalTorusState(u, t)

    @classmethod
    def flat(cls, n):
        return cls(np.zeros((n, n)))

    @classmethod
    def cosine(cls, n, amplitude, mode=1):
        """u = amplitude * cos(mode * x1), constant in x2."""
        x = grid_points(n)
        u = amplitude * np.cos(mode * x)[:, None] * np.ones((1, n))
        return cls(u)


@dataclass(frozen=True)
class WarpedProductState:
    """Metric g = phi(s)^2 ds^2 + psi(s)^2 g_sphere on S^1 x S^(dim-1)."""

    phi: np.ndarray
    psi: np.ndarray
    dim: int
    t: float = 0.0

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float)
        psi = np.asarray(self.psi, dtype=float)
        if phi.ndim != 1 or phi.shape != psi.shape:
            raise InvalidStateError(
                f"phi and psi must be 1-D grids of equal length, got {phi.shape}, {psi.shape}"
            )
        if phi.size < 8 or phi.size % 2:
            raise InvalidStateError(f"grid size N must be even and >= 8, got {phi.size}")
        if self.dim < 3:
            raise UnsupportedDimensionError(
                f"warped products need dim >= 3, got {self.dim}"
            )
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "psi", psi)

    @property
    def n(self) -> int:
        return self.phi.size

    @property
    def h(self) -> float:
        return 2.0 * np.pi / self.n

    def volume(self) -> float:
        """Riemannian volume, including the area of the unit (dim-1)-sphere."""
        return float(
            sphere_area(self.dim - 1) * np.sum(self.phi * self.psi ** (self.dim - 1)) * self.h
        )

    def with_profiles(self, phi, psi, t):
        return WarpedProductState(phi, psi, self.dim, t)

    @classmethod
    def product(cls, n, dim, r0=1.0, phi0=1.0):
        return cls(np.full(n, float(phi0)), np.full(n, float(r0)), dim)

    @classmethod
    def from_functions(cls, n, dim, psi_fn, phi_fn=None):
        s = grid_points(n)
        phi = np.ones(n) if phi_fn is None else np.broadcast_to(phi_fn(s), (n,)).astype(float)
        return cls(phi, np.asarray(psi_fn(s), dtype=float), dim)


def sphere_area(k):
    """Area of the unit k-sphere."""
    return 2.0 * math.pi ** ((k + 1) / 2.0) / math.gamma((k + 1) / 2.0)


# ---------------------------------------------------------------------------
# curvature fields


@dataclass
class CurvatureFields:
    """Pointwise curvature data on a grid.

    ``ric_frame`` has a trailing axis of distinct Ricci eigenvalues: one value
    (R/2) on the torus, two values (lambda_s, lambda_sphere) for warped
    products. ``ric_mult`` holds the multiplicity of each.
    """

    dim: int
    R: np.ndarray
    ric_frame: np.ndarray
    ric_mult: tuple
    rm_norm2: np.ndarray
    ric0_norm2: np.ndarray
    weyl_norm2: np.ndarray
    lap_R: np.ndarray
    grad_R_norm2: np.ndarray
    extra: dict = field(default_factory=dict)

    @property
    def ric_norm2(self):
        mult = np.asarray(self.ric_mult, dtype=float)
        return np.sum(self.ric_frame**2 * mult, axis=-1)


def _require_finite(name, arr):
    if not np.all(np.isfinite(arr)):
        raise InvalidStateError(f"non-finite values in {name}")


def curvature_conformal2d(state: ConformalTorusState, full=True) -> CurvatureFields:
    """Curvature of g = exp(2u) g_flat: R = -2 exp(-2u) lap_flat(u).

    In two dimensions Ric = (R/2) g, the traceless Ricci and Weyl parts vanish
    and |Rm|^2 = R^2. With ``full=False`` the derivative fields of R are left
    as NaN (enough for the flow right-hand side).
    """
    u = state.u
    _require_finite("u", u)
    h = state.h
    conf = np.exp(-2.0 * u)
    R = -2.0 * conf * flat_laplacian(u, h)
    zeros = np.zeros_like(R)
    if full:
        lap_R = conf * flat_laplacian(R, h)
        grad2 = conf * (d1(R, h, axis=0) ** 2 + d1(R, h, axis=1) ** 2)
    else:
        lap_R = grad2 = np.full_like(R, np.nan)
    return CurvatureFields(
        dim=2,
        R=R,
        ric_frame=(0.5 * R)[..., None],
        ric_mult=(2,),
        rm_norm2=R**2,
        ric0_norm2=zeros,
        weyl_norm2=zeros.copy(),
        lap_R=lap_R,
        grad_R_norm2=grad2,
        extra={"conf": conf},
    )


@dataclass
class WarpedTerms:
    """Arclength derivatives of a warped profile.

    Primes on the grid are d/ds; the arclength sigma has d sigma = phi ds, so
    f_sigma = f'/phi and f_sigma_sigma = (f'' phi - f' phi') / phi^3.
    """

    phi: np.ndarray
    psi: np.ndarray
    phi_s: np.ndarray
    psi_sig: np.ndarray
    psi_sigsig: np.ndarray
    h: float
    dim: int

    def sigma1(self, f):
        return d1(f, self.h) / self.phi

    def sigma2(self, f):
        return (d2(f, self.h) * self.phi - d1(f, self.h) * self.phi_s) / self.phi**3

    def laplacian(self, f):
        """Laplace-Beltrami operator on functions of s alone."""
        return self.sigma2(f) + (self.dim - 1) * (self.psi_sig / self.psi) * self.sigma1(f)


def check_positive(state: WarpedProductState, floor=POSITIVITY_FLOOR):
    for name in ("psi", "phi"):
        arr = getattr(state, name)
        _require_finite(name, arr)
        i = int(np.argmin(arr))
        if arr[i] < floor:
            raise DegenerateMetricError(name, i, arr[i])


def warped_terms(state: WarpedProductState) -> WarpedTerms:
    check_positive(state)
    h = state.h
    phi, psi = state.phi, state.psi
    phi_s = d1(phi, h)
    p1 = d1(psi, h)
    p2 = d2(psi, h)
    return WarpedTerms(
        phi=phi,
        psi=psi,
        phi_s=phi_s,
        psi_sig=p1 / phi,
        psi_sigsig=(p2 * phi - p1 * phi_s) / phi**3,
        h=h,
        dim=state.dim,
    )


def warped_sectional(terms: WarpedTerms):
    """Mixed-plane curvature L and sphere-plane curvature K."""
    L = -terms.psi_sigsig / terms.psi
    K = (1.0 - terms.psi_sig**2) / terms.psi**2
    return L, K


def sectional_matrix(L, K, dim):
    """Per-point n x n matrix of frame sectional curvatures (frame 0 = s)."""
    L = np.asarray(L, dtype=float)
    K = np.asarray(K, dtype=float)
    S = np.empty(L.shape + (dim, dim))
    S[...] = K[..., None, None]
    S[..., 0, :] = L[..., None]
    S[..., :, 0] = L[..., None]
    idx = np.arange(dim)
    S[..., idx, idx] = 0.0
    return S


def curvature_from_sectional(S):
    """R_ijkl = S_ij (d_ik d_jl - d_il d_jk) for a diagonal curvature operator."""
    dim = S.shape[-1]
    eye = np.eye(dim)
    return np.einsum("...ij,ik,jl->...ijkl", S, eye, eye) - np.einsum(
        "...ij,il,jk->...ijkl", S, eye, eye
    )


def curvature_warped(state: WarpedProductState, full=True) -> CurvatureFields:
    """Curvature of phi^2 ds^2 + psi^2 g_sphere.

    The frame Ricci values are lambda_s = (n-1) L and
    lambda_sphere = L + (n-2) K with L = -psi_sigsig/psi and
    K = (1 - psi_sig^2)/psi^2. |W|^2 comes from assembling the Weyl tensor
    pointwise, not from the orthogonal decomposition. ``full=False`` skips
    the Weyl assembly and derivatives of R (NaN-filled).

    Raises
    ------
    DegenerateMetricError
        If min(phi) or min(psi) falls below the positivity floor.
    """
    n = state.dim
    terms = warped_terms(state)
    L, K = warped_sectional(terms)
    lam_s = (n - 1) * L
    lam_sph = L + (n - 2) * K
    R = lam_s + (n - 1) * lam_sph
    ric0 = (lam_s - R / n) ** 2 + (n - 1) * (lam_sph - R / n) ** 2
    rm2 = 4 * (n - 1) * L**2 + 2 * (n - 1) * (n - 2) * K**2

    if full:
        rm = curvature_from_sectional(sectional_matrix(L, K, n))
        ric = ricci_contraction(rm)
        W = _weyl(rm, ric, np.trace(ric, axis1=-2, axis2=-1))
        weyl2 = np.sum(W**2, axis=(-4, -3, -2, -1))
        lap_R = terms.laplacian(R)
        grad2 = terms.sigma1(R) ** 2
    else:
        weyl2 = lap_R = grad2 = np.full_like(R, np.nan)
    return CurvatureFields(
        dim=n,
        R=R,
        ric_frame=np.stack([lam_s, lam_sph], axis=-1),
        ric_mult=(1, n - 1),
        rm_norm2=rm2,
        ric0_norm2=ric0,
        weyl_norm2=weyl2,
        lap_R=lap_R,
        grad_R_norm2=grad2,
        extra={"terms": terms, "L": L, "K": K},
    )


def curvature(state) -> CurvatureFields:
    if isinstance(state, ConformalTorusState):
        return curvature_conformal2d(state)
    if isinstance(state, WarpedProductState):
        return curvature_warped(state)
    raise TypeError(f"unsupported state type {type(state).__name__}")


# ---------------------------------------------------------------------------
# pointwise algebraic curvature


@dataclass(frozen=True)
class AlgebraicCurvature:
    """Curvature tensor R_ijkl at one point, orthonormal frame."""

    dim: int
    rm: np.ndarray

    def __post_init__(self):
        rm = np.asarray(self.rm, dtype=float)
        if rm.shape != (self.dim,) * 4:
            raise ValueError(f"rm must have shape {(self.dim,) * 4}, got {rm.shape}")
        object.__setattr__(self, "rm", rm)

    def ricci(self):
        return ricci_contraction(self.rm)

    def scalar(self):
        return float(np.trace(self.ricci()))

    def symmetry_violation(self):
        """Largest deviation from the pair symmetries and first Bianchi identity."""
        rm = self.rm
        checks = (
            rm + rm.transpose(1, 0, 2, 3),
            rm + rm.transpose(0, 1, 3, 2),
            rm - rm.transpose(2, 3, 0, 1),
            bianchi_sum(rm),
        )
        return max(float(np.max(np.abs(c))) for c in checks)

    @classmethod
    def space_form(cls, dim, K=1.0):
        eye = np.eye(dim)
        rm = K * (np.einsum("ik,jl->ijkl", eye, eye) - np.einsum("il,jk->ijkl", eye, eye))
        return cls(dim, rm)

    @classmethod
    def from_sectional(cls, S):
        S = np.asarray(S, dtype=float)
        return cls(S.shape[-1], curvature_from_sectional(S))


def bianchi_sum(rm):
    """R_ijkl + R_jkil + R_kijl."""
    return rm + rm.transpose(1, 2, 0, 3) + rm.transpose(2, 0, 1, 3)


def kulkarni_nomizu(a, b):
    """(a o b)_ijkl = a_ik b_jl + a_jl b_ik - a_il b_jk - a_jk b_il."""
    return (
        np.einsum("ik,jl->ijkl", a, b)
        + np.einsum("jl,ik->ijkl", a, b)
        - np.einsum("il,jk->ijkl", a, b)
        - np.einsum("jk,il->ijkl", a, b)
    )


def ricci_contraction(rm):
    return np.einsum("...ijkj->...ik", rm)


def warped_algebraic_curvature(state: WarpedProductState, index: int) -> AlgebraicCurvature:
    """Frame curvature tensor of a warped state at one grid point."""
    L, K = warped_sectional(warped_terms(state))
    return AlgebraicCurvature.from_sectional(sectional_matrix(L[index], K[index], state.dim))


def _validate(curv: AlgebraicCurvature, tol):
    scale = 1.0 + float(np.max(np.abs(curv.rm)))
    v = curv.symmetry_violation()
    if not np.isfinite(v) or v > tol * scale:
        raise InvalidCurvatureError("input is not an algebraic curvature tensor", v)


def hamilton_B(curv: AlgebraicCurvature, tol=1e-10) -> np.ndarray:
    """B_ijkl = sum_pq R_piqj R_pkql.

    Raises
    ------
    InvalidCurvatureError
        If ``curv`` violates the curvature symmetries by more than ``tol``
        (relative to its size).
    """
    _validate(curv, tol)
    return np.einsum("piqj,pkql->ijkl", curv.rm, curv.rm)


def b_identity_residual(curv: AlgebraicCurvature, tol=1e-10) -> float:
    """max_ik | sum_j (B_ijkj - 2 B_ijjk) |, which vanishes by first Bianchi."""
    B = hamilton_B(curv, tol)
    res = np.einsum("ijkj->ik", B) - 2.0 * np.einsum("ijjk->ik", B)
    return float(np.max(np.abs(res)))


def _weyl(rm, ric, R):
    n = rm.shape[-1]
    g = np.eye(n)
    R = np.asarray(R, dtype=float)[..., None, None, None, None]
    ric_part = (
        np.einsum("ik,...jl->...ijkl", g, ric)
        - np.einsum("il,...jk->...ijkl", g, ric)
        - np.einsum("jk,...il->...ijkl", g, ric)
        + np.einsum("jl,...ik->...ijkl", g, ric)
    )
    gg = np.einsum("ik,jl->ijkl", g, g) - np.einsum("il,jk->ijkl", g, g)
    return rm - ric_part / (n - 2) + R * gg / ((n - 1) * (n - 2))


def weyl_from_rm(curv: AlgebraicCurvature, ric=None, R=None) -> np.ndarray:
    """Weyl tensor of ``curv``; ``ric`` and ``R`` default to its own traces."""
    if curv.dim < 3:
        raise UnsupportedDimensionError(f"Weyl tensor needs dim >= 3, got {curv.dim}")
    if ric is None:
        ric = curv.ricci()
    if R is None:
        R = float(np.trace(ric))
    return _weyl(curv.rm, np.asarray(ric, dtype=float), R)


def weyl_trace(W):
    """Largest single contraction sum_i W_ijil."""
    return float(np.max(np.abs(np.einsum("ijil->jl", W))))


def decomposition_residual(fields: CurvatureFields):
    """Relative defect of |Rm|^2 = |W|^2 + 4/(n-2)|Ric0|^2 + 2/(n(n-1)) R^2."""
    n = fields.dim
    if n < 3:
        raise UnsupportedDimensionError("orthogonal decomposition needs dim >= 3")
    rhs = (
        fields.weyl_norm2
        + 4.0 / (n - 2) * fields.ric0_norm2
        + 2.0 / (n * (n - 1)) * fields.R**2
    )
    return np.abs(fields.rm_norm2 - rhs) / (1.0 + np.abs(fields.rm_norm2))
