import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ryflow import FlowParams
from ryflow.oracles import (
    EinsteinFamily,
    blow_up_bound,
    einstein_extinction_time,
    einstein_scalar,
    einstein_scale,
    product_extinction_time,
    product_metric_rates,
    product_metric_solution,
    scalar_min_comparison,
)

RICCI3 = FlowParams(1.0, 0.0, 3)


def test_ricci_flat_scale_is_constant():
    fam = EinsteinFamily(0.0, 2.5, 4)
    for t in (0.0, 1.0, 100.0):
        assert einstein_scale(fam, FlowParams(1.0, 0.3, 4), t) == 2.5
    assert einstein_extinction_time(fam, FlowParams(1.0, 0.3, 4)) == math.inf


def test_round_three_sphere():
    fam = EinsteinFamily(2.0, 1.0, 3)
    for t in np.linspace(0, 0.24, 13):
        assert einstein_scale(fam, RICCI3, t) == pytest.approx(1 - 4 * t, abs=1e-15)
    assert einstein_extinction_time(fam, RICCI3) == 0.25
    assert blow_up_bound(6.0, RICCI3) == 1.0
    assert einstein_scale(fam, RICCI3, 0.3) < 0  # past extinction is flagged by sign
    assert einstein_scalar(fam, RICCI3, 0.3) == math.inf


def test_round_sphere_above_comparison_bound():
    fam = EinsteinFamily(2.0, 1.0, 3)
    for t in np.linspace(0, 0.249, 50):
        assert 6 / (1 - 4 * t) >= scalar_min_comparison(6.0, RICCI3, t)
        assert einstein_scalar(fam, RICCI3, t) == pytest.approx(6 / (1 - 4 * t), rel=1e-14)


def test_product_solution_ricci_flow():
    p = FlowParams(1.0, 0.0, 4)
    for t in (0.0, 0.1, 0.2):
        sol = product_metric_solution(1.0, 1.7, p, t)
        assert sol.psi**2 == pytest.approx(1 - 4 * t, abs=1e-15)
        assert sol.phi == 1.7 and not sol.extinct
    assert product_extinction_time(1.0, p) == 0.25


def test_product_solution_flags_extinction():
    sol = product_metric_solution(1.0, 1.0, FlowParams(1.0, 0.0, 4), 0.3)
    assert sol.extinct and math.isnan(sol.psi) and math.isnan(sol.phi)


def test_product_solution_with_beta():
    p = FlowParams(1.0, 1.0, 3)
    r0, phi0, t = 1.3, 0.8, 0.2
    sol = product_metric_solution(r0, phi0, p, t)
    psi2 = r0**2 - 4 * t
    assert sol.psi**2 == pytest.approx(psi2, rel=1e-14)
    assert sol.phi**2 == pytest.approx(phi0**2 * math.sqrt(psi2 / r0**2), rel=1e-14)


@given(st.integers(3, 7), st.floats(0.1, 3.0), st.floats(0.001, 2.0), st.floats(0.5, 2.0), st.floats(0.0, 0.9))
def test_product_solution_satisfies_its_odes(n, alpha, off, r0, frac):
    beta = -alpha / (n - 1) + off
    p = FlowParams(alpha, beta, n)
    t = frac * product_extinction_time(r0, p)
    sol = product_metric_solution(r0, 1.0, p, t)
    # analytic time derivatives of the closed forms
    c = (n - 2) * (2 * alpha + (n - 1) * beta)
    e = beta * (n - 1) / (2 * alpha + (n - 1) * beta)
    dpsi2 = -c
    dphi2 = e * (sol.psi**2 / r0**2) ** (e - 1) * (-c / r0**2)
    rates = product_metric_rates(sol.phi, sol.psi, p)
    assert abs(rates[1] - dpsi2) <= 1e-12 * abs(dpsi2)
    assert abs(rates[0] - dphi2) <= 1e-12 * max(1.0, abs(dphi2))


@pytest.mark.parametrize("a", [0.0, -1.0])
def test_bound_infinite_without_positive_curvature(a):
    assert blow_up_bound(a, RICCI3) == math.inf


def test_bound_infinite_in_dimension_two():
    assert blow_up_bound(5.0, FlowParams(1.0, 0.0, 2)) == math.inf


def test_bound_examples():
    assert blow_up_bound(6.0, FlowParams(1.0, 0.0, 3)) == 1.0
    assert blow_up_bound(12.0, FlowParams(2.0, 0.0, 4)) == 0.25


def test_comparison_examples():
    assert scalar_min_comparison(6.0, RICCI3, 0.0) == 6.0
    assert scalar_min_comparison(6.0, RICCI3, 0.125) == pytest.approx(36 / 5.25, rel=1e-15)
    assert scalar_min_comparison(6.0, RICCI3, 1.0) == math.inf
    with pytest.raises(ValueError):
        scalar_min_comparison(0.0, RICCI3, 0.1)


def test_comparison_nondecreasing():
    vals = [scalar_min_comparison(3.0, FlowParams(1.5, 0.2, 5), t) for t in np.linspace(0, 0.5, 200)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


@given(st.integers(3, 6), st.floats(0.05, 3.0), st.floats(1e-3, 3.0),
       st.floats(0.05, 5.0), st.floats(0.1, 5.0))
def test_einstein_lifetime_below_bound(n, alpha, off, lam, c0):
    p = FlowParams(alpha, -alpha / (n - 1) + off, n)
    fam = EinsteinFamily(lam, c0, n)
    assert einstein_extinction_time(fam, p) <= blow_up_bound(n * lam / c0, p) + 1e-12


def test_family_validation():
    with pytest.raises(ValueError):
        EinsteinFamily(1.0, 0.0, 3)
