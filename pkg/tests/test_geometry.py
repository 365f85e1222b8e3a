import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_curvature_tensor
from ryflow import (
    AlgebraicCurvature,
    ConformalTorusState,
    DegenerateMetricError,
    InvalidCurvatureError,
    InvalidStateError,
    UnsupportedDimensionError,
    WarpedProductState,
    b_identity_residual,
    curvature_conformal2d,
    curvature_warped,
    hamilton_B,
    weyl_from_rm,
)
from ryflow.geometry import (
    decomposition_residual,
    grid_points,
    sectional_matrix,
    warped_algebraic_curvature,
    weyl_trace,
)


# ---------------------------------------------------------------------------
# conformal torus


@pytest.mark.parametrize("c", [0.0, 0.7, -1.3])
def test_constant_conformal_factor_is_flat(c):
    f = curvature_conformal2d(ConformalTorusState(np.full((16, 16), c)))
    for arr in (f.R, f.rm_norm2, f.ric0_norm2, f.weyl_norm2, f.lap_R, f.grad_R_norm2):
        assert np.all(arr == 0.0)


def analytic_R(n, eps):
    x = grid_points(n)[:, None] * np.ones((1, n))
    return 2 * eps * np.cos(x) * np.exp(-2 * eps * np.cos(x))


def test_conformal_curvature_matches_closed_form_at_second_order():
    eps = 0.1
    errs = []
    for n in (16, 32, 64):
        f = curvature_conformal2d(ConformalTorusState.cosine(n, eps))
        errs.append(np.max(np.abs(f.R - analytic_R(n, eps))))
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert all(abs(o - 2.0) <= 0.3 for o in orders), orders
    assert errs[-1] < 1e-3


def test_two_dimensional_norms():
    f = curvature_conformal2d(ConformalTorusState.cosine(16, 0.3))
    assert np.array_equal(f.rm_norm2, f.R**2)
    assert np.allclose(f.ric_norm2, f.R**2 / 2)
    assert np.all(f.ric0_norm2 == 0) and np.all(f.weyl_norm2 == 0)


def test_non_finite_conformal_factor_rejected():
    u = np.zeros((8, 8))
    u[3, 3] = np.nan
    with pytest.raises(InvalidStateError):
        curvature_conformal2d(ConformalTorusState(u))


@pytest.mark.parametrize("shape", [(8, 10), (7, 7), (6, 6), (8,)])
def test_bad_torus_grids_rejected(shape):
    with pytest.raises(InvalidStateError):
        ConformalTorusState(np.zeros(shape))


def test_torus_volume():
    assert math.isclose(ConformalTorusState.flat(16).volume(), 4 * math.pi**2)


# ---------------------------------------------------------------------------
# warped products


@pytest.mark.parametrize("dim", [3, 4, 6])
@pytest.mark.parametrize("r", [0.5, 1.0, 2.5])
def test_product_metric_curvature(dim, r):
    f = curvature_warped(WarpedProductState.product(16, dim, r0=r))
    assert np.allclose(f.ric_frame[:, 0], 0.0, atol=1e-14)
    assert np.allclose(f.ric_frame[:, 1], (dim - 2) / r**2, rtol=1e-14)
    assert np.allclose(f.R, (dim - 1) * (dim - 2) / r**2, rtol=1e-14)


def spectral_derivatives(f_vals):
    n = f_vals.size
    k = np.fft.fftfreq(n, d=1.0 / n)
    fh = np.fft.fft(f_vals)
    d1 = np.real(np.fft.ifft(1j * k * fh))
    d2 = np.real(np.fft.ifft(-(k**2) * fh))
    return d1, d2


def refined_warped_R(psi_fn, dim, n, factor=8):
    """R from the s-derivative formulas with spectral derivatives on a grid
    ``factor`` times finer, sampled back at the coarse nodes (phi = 1)."""
    s = 2 * np.pi * np.arange(n * factor) / (n * factor)
    psi = psi_fn(s)
    p1, p2 = spectral_derivatives(psi)
    lam_s = -(dim - 1) * p2 / psi
    lam_sph = -p2 / psi - (dim - 2) * (p1**2 - 1) / psi**2
    return (lam_s + (dim - 1) * lam_sph)[::factor]


def test_warped_scalar_curvature_against_refined_spectral_oracle():
    psi_fn = lambda s: 2 + 0.5 * np.sin(s)  # noqa: E731
    errs = []
    for n in (32, 64, 128):
        f = curvature_warped(WarpedProductState.from_functions(n, 4, psi_fn))
        errs.append(np.max(np.abs(f.R - refined_warped_R(psi_fn, 4, n))))
    for i in range(2):
        assert math.log2(errs[i] / errs[i + 1]) > 1.7
    assert errs[0] < 2e-2


def test_reparametrisation_invariance():
    # phi = 1/2 on an N grid is the same metric as phi = 1 with the doubled
    # profile on a 2N grid, and the grids share arclength spacing.
    n = 32
    half = WarpedProductState.from_functions(n, 4, lambda s: 2 + 0.5 * np.sin(s), lambda s: 0.5)
    unit = WarpedProductState.from_functions(2 * n, 4, lambda s: 2 + 0.5 * np.sin(2 * s))
    a, b = curvature_warped(half), curvature_warped(unit)
    assert np.allclose(a.R, b.R[:n], rtol=1e-12, atol=1e-12)
    assert np.allclose(a.ric_frame, b.ric_frame[:n], rtol=1e-12, atol=1e-12)


def test_nonconstant_phi_is_arclength_reparametrisation():
    # phi(s) ds with psi a function of arclength: compare against phi = 1
    # evaluated through the refined oracle at second order
    n = 128
    phi_fn = lambda s: 1 + 0.2 * np.cos(s)  # noqa: E731
    sigma = lambda s: s + 0.2 * np.sin(s)  # noqa: E731  arclength, period 2pi
    psi_fn = lambda s: 2 + 0.3 * np.cos(sigma(s))  # noqa: E731
    st_ = WarpedProductState.from_functions(n, 4, psi_fn, phi_fn)
    f = curvature_warped(st_)
    s = grid_points(n)
    # exact arclength derivatives of psi = 2 + 0.3 cos(sigma)
    ps = -0.3 * np.sin(sigma(s))
    pss = -0.3 * np.cos(sigma(s))
    psi = psi_fn(s)
    L, K = -pss / psi, (1 - ps**2) / psi**2
    R = 2 * 3 * L + 3 * 2 * K
    assert np.max(np.abs(f.R - R)) < 5e-3


def test_volume_of_product_metric():
    st_ = WarpedProductState.product(16, 4, r0=2.0, phi0=1.5)
    # 2pi * 1.5 * area(S^3) * 2^3, area(S^3) = 2 pi^2
    assert math.isclose(st_.volume(), 2 * math.pi * 1.5 * 2 * math.pi**2 * 8, rel_tol=1e-13)


@given(st.integers(0, 10**6))
def test_dimension_three_weyl_vanishes(seed):
    rng = np.random.default_rng(seed)
    s = grid_points(32)
    psi = 2 + rng.uniform(-0.5, 0.5) * np.sin(s) + rng.uniform(-0.3, 0.3) * np.cos(2 * s)
    phi = 1 + rng.uniform(-0.3, 0.3) * np.cos(s)
    f = curvature_warped(WarpedProductState(phi, psi, 3))
    assert np.all(f.weyl_norm2 <= 1e-12 * (1 + f.rm_norm2))


@given(st.integers(3, 7), st.integers(0, 10**6))
def test_orthogonal_decomposition_on_warped_grids(dim, seed):
    rng = np.random.default_rng(seed)
    s = grid_points(32)
    psi = 2.5 + rng.uniform(-0.6, 0.6) * np.sin(s + rng.uniform(0, 6))
    phi = 1 + rng.uniform(-0.3, 0.3) * np.cos(2 * s)
    f = curvature_warped(WarpedProductState(phi, psi, dim))
    assert np.max(decomposition_residual(f)) <= 1e-9
    assert np.all(f.ric0_norm2 >= -1e-14)
    assert np.allclose(f.ric0_norm2, f.ric_norm2 - f.R**2 / dim, atol=1e-12)


def test_warped_metrics_are_conformally_flat():
    # S^1 x S^3 with any warping is locally conformally flat, so W = 0
    for psi_fn in (lambda s: 1.0 + 0 * s, lambda s: 2 + 0.5 * np.sin(s)):
        f = curvature_warped(WarpedProductState.from_functions(32, 4, psi_fn))
        assert np.max(f.weyl_norm2) <= 1e-24 * (1 + np.max(f.rm_norm2))
        assert np.max(decomposition_residual(f)) <= 1e-9


def test_degenerate_profile_reports_location():
    psi = 1 + np.cos(grid_points(16))  # zero at index 8
    with pytest.raises(DegenerateMetricError) as exc:
        curvature_warped(WarpedProductState(np.ones(16), psi, 4))
    assert exc.value.field == "psi" and exc.value.index == 8


def test_negative_phi_is_degenerate():
    with pytest.raises(DegenerateMetricError, match="phi"):
        curvature_warped(WarpedProductState(-np.ones(16), np.ones(16), 4))


def test_warped_needs_dim_three():
    with pytest.raises(UnsupportedDimensionError):
        WarpedProductState.product(16, 2)


def test_warped_shape_mismatch():
    with pytest.raises(InvalidStateError):
        WarpedProductState(np.ones(16), np.ones(18), 4)


# ---------------------------------------------------------------------------
# algebraic curvature, B tensor, Weyl


def loop_B(rm):
    n = rm.shape[0]
    B = np.zeros_like(rm)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    B[i, j, k, l] = sum(
                        rm[p, i, q, j] * rm[p, k, q, l] for p in range(n) for q in range(n)
                    )
    return B


def test_zero_curvature_gives_zero_B():
    z = AlgebraicCurvature(4, np.zeros((4,) * 4))
    assert np.all(hamilton_B(z) == 0)
    assert b_identity_residual(z) == 0.0


def test_space_form_B_matches_loop_summation():
    c = AlgebraicCurvature.space_form(3, 1.0)
    B = hamilton_B(c)
    assert np.allclose(B, loop_B(c.rm), atol=1e-15)
    assert b_identity_residual(c) <= 1e-12


def test_space_form_conventions():
    c = AlgebraicCurvature.space_form(4, 1.0)
    assert np.allclose(c.ricci(), 3 * np.eye(4))
    assert c.scalar() == 12.0


def test_B_symmetries(rng):
    c = AlgebraicCurvature(4, random_curvature_tensor(rng, 4))
    B = hamilton_B(c)
    assert np.allclose(B, B.transpose(1, 0, 3, 2), atol=1e-12)
    assert np.allclose(B, B.transpose(2, 3, 0, 1), atol=1e-12)
    assert np.allclose(B, loop_B(c.rm), atol=1e-10)


def test_B_identity_at_warped_sample_point():
    st_ = WarpedProductState.from_functions(32, 4, lambda s: 2 + 0.5 * np.sin(s))
    for idx in (0, 5, 17):
        assert b_identity_residual(warped_algebraic_curvature(st_, idx)) <= 1e-10


@given(st.integers(2, 6), st.integers(0, 10**6))
def test_B_identity_on_random_curvature(dim, seed):
    rm = random_curvature_tensor(np.random.default_rng(seed), dim)
    assert b_identity_residual(AlgebraicCurvature(dim, rm)) <= 1e-10 * (1 + np.max(np.abs(rm))) ** 2


def test_non_curvature_input_rejected(rng):
    rm = rng.normal(size=(3, 3, 3, 3))
    with pytest.raises(InvalidCurvatureError) as exc:
        hamilton_B(AlgebraicCurvature(3, rm))
    assert exc.value.violation > 0.1


def test_weyl_needs_dim_three():
    with pytest.raises(UnsupportedDimensionError):
        weyl_from_rm(AlgebraicCurvature.space_form(2))


@pytest.mark.parametrize("dim", [3, 4, 5, 7])
def test_space_form_weyl_vanishes(dim):
    assert np.max(np.abs(weyl_from_rm(AlgebraicCurvature.space_form(dim, -0.8)))) <= 1e-14


@given(st.integers(0, 10**6))
def test_dimension_three_algebraic_weyl_vanishes(seed):
    c = AlgebraicCurvature(3, random_curvature_tensor(np.random.default_rng(seed), 3))
    assert np.max(np.abs(weyl_from_rm(c))) <= 1e-10


@given(st.integers(4, 6), st.integers(0, 10**6))
def test_weyl_trace_free_with_curvature_symmetries(dim, seed):
    c = AlgebraicCurvature(dim, random_curvature_tensor(np.random.default_rng(seed), dim))
    W = weyl_from_rm(c)
    assert weyl_trace(W) <= 1e-10
    assert AlgebraicCurvature(dim, W).symmetry_violation() <= 1e-10


def test_sphere_times_sphere_has_nonzero_weyl():
    # S^2 x S^2: K = 1 on the two factor planes, 0 on mixed planes
    S = np.zeros((4, 4))
    S[0, 1] = S[1, 0] = S[2, 3] = S[3, 2] = 1.0
    c = AlgebraicCurvature.from_sectional(S)
    W = weyl_from_rm(c)
    ric = c.ricci()
    R = np.trace(ric)
    ric0 = ric - R / 4 * np.eye(4)
    assert np.sum(W**2) > 1.0
    assert weyl_trace(W) <= 1e-14
    lhs = np.sum(c.rm**2)
    rhs = np.sum(W**2) + 2 * np.sum(ric0**2) + R**2 / 6
    assert abs(lhs - rhs) <= 1e-12 * lhs


def test_sectional_matrix_layout():
    S = sectional_matrix(np.array([2.0]), np.array([3.0]), 4)[0]
    assert np.all(np.diag(S) == 0)
    assert np.all(S[0, 1:] == 2.0) and np.all(S[1:, 0] == 2.0)
    assert S[1, 2] == 3.0 and S[3, 2] == 3.0
