import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ryflow import FlowParams
from ryflow.symbol import (
    apply_symbol,
    basis_pairs,
    build_symbol_matrix,
    char_poly_scale,
    char_poly_V,
    det_V_minus,
    expected_spectrum,
    is_strongly_elliptic,
    sym_to_vec,
    symbol_spectrum,
    vec_to_sym,
)


def P(a, b, n):
    return FlowParams(a, b, n, allow_degenerate=True)


def test_ricci_flow_surface_is_identity():
    m = build_symbol_matrix(P(1, 0, 2))
    assert np.array_equal(m.entries, np.eye(3))
    assert symbol_spectrum(m) == [(1.0, 3)]


def test_three_dimensional_matrix_layout():
    m = build_symbol_matrix(P(1, 2, 3)).entries
    assert np.array_equal(m[:3, :3], [[1, 2, 2], [0, 3, 2], [0, 2, 3]])
    assert np.array_equal(m[3:, 3:], np.eye(3))
    assert np.all(m[:3, 3:] == 0) and np.all(m[3:, :3] == 0)


def eq_symbol_e1(h, a, b):
    """alpha h_ik + beta (delta_ik tr h - h_11 delta_ik) with xi = e_1."""
    n = h.shape[0]
    return a * h + b * (np.trace(h) - h[0, 0]) * np.eye(n)


def test_matrix_action_matches_direct_symbol(rng):
    for _ in range(100):
        n = int(rng.integers(2, 7))
        a, b = rng.uniform(0.1, 2), rng.uniform(-0.3, 2)
        h = rng.normal(size=(n, n))
        h = h + h.T
        m = build_symbol_matrix(P(a, b, n))
        got = vec_to_sym(m.entries @ sym_to_vec(h), n)
        assert np.max(np.abs(got - eq_symbol_e1(h, a, b))) <= 1e-13 * (1 + np.max(np.abs(h)))
        assert np.allclose(apply_symbol(h, np.eye(n)[0], P(a, b, n)), got, atol=1e-13)


def test_general_covector_scales_spectrum(rng):
    n, a, b = 4, 0.8, 0.3
    xi = rng.normal(size=n)
    cols = [sym_to_vec(apply_symbol(vec_to_sym(e, n), xi, P(a, b, n))) for e in np.eye(10)]
    ev = np.sort(np.linalg.eigvals(np.array(cols).T).real)
    expected = np.sort([a] * 9 + [a + 3 * b]) * (xi @ xi)
    assert np.allclose(ev, expected, atol=1e-12)


@pytest.mark.parametrize("a,b,n,spec", [
    (1.0, 1.0, 4, [(1.0, 9), (4.0, 1)]),
    (1.0, 0.0, 2, [(1.0, 3)]),
    (0.7, -0.1, 5, [(0.3, 1), (0.7, 14)]),
])
def test_spectrum_examples(a, b, n, spec):
    got = symbol_spectrum(build_symbol_matrix(P(a, b, n)))
    assert [k for _, k in got] == [k for _, k in spec]
    assert np.allclose([v for v, _ in got], [v for v, _ in spec], atol=1e-10)
    exp = expected_spectrum(P(a, b, n))
    assert [k for _, k in exp] == [k for _, k in spec]
    assert np.allclose([v for v, _ in exp], [v for v, _ in spec], rtol=1e-15)


@given(st.integers(2, 8), st.floats(0.05, 3.0), st.floats(1e-3, 3.0))
def test_spectrum_property(n, a, off):
    b = -a / (n - 1) + off
    ev = np.sort(np.linalg.eigvals(build_symbol_matrix(P(a, b, n)).entries).real)
    size = n * (n + 1) // 2
    assert np.max(np.abs(ev - np.sort([a] * (size - 1) + [a + (n - 1) * b]))) <= 1e-10


def test_basis_order():
    assert basis_pairs(3) == [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)]


@pytest.mark.parametrize("n", [3, 4, 6])
def test_char_poly_roots(n):
    p = P(1.3, 0.4, n)
    assert det_V_minus(p, 1.3) == pytest.approx(0.0, abs=1e-12)
    assert char_poly_V(p, 1.3) == 0.0
    assert det_V_minus(p, 1.3 + (n - 1) * 0.4) == pytest.approx(0.0, abs=1e-12)


def test_char_poly_example():
    assert det_V_minus(P(1, 0.5, 4), 0.0) == pytest.approx(2.5, rel=1e-14)
    assert char_poly_V(P(1, 0.5, 4), 0.0) == 2.5


@given(st.integers(2, 8), st.floats(0.05, 3.0), st.floats(-1.0, 3.0), st.floats(-1.0, 1.0))
def test_char_poly_matches_determinant(n, a, b, frac):
    p = P(a, b, n)
    lam = frac * 10 * (abs(a) + n * abs(b))
    assert abs(det_V_minus(p, lam) - char_poly_V(p, lam)) <= 1e-9 * char_poly_scale(p, lam)


@pytest.mark.parametrize("a,b,n,verdict", [
    (1.0, 0.0, 2, "elliptic"), (1.0, 0.0, 7, "elliptic"),
    (2.0, -1.0, 3, "boundary"), (1.0, -1.0, 3, "not_elliptic"),
    (0.0, 1.0, 3, "boundary"), (-1.0, 1.0, 3, "not_elliptic"),
])
def test_verdicts(a, b, n, verdict):
    assert is_strongly_elliptic(P(a, b, n))[0] == verdict


@given(st.integers(2, 8), st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
def test_verdict_agrees_with_smallest_eigenvalue(n, a, b):
    verdict, lo = is_strongly_elliptic(P(a, b, n))
    ev = np.linalg.eigvals(build_symbol_matrix(P(a, b, n)).entries).real
    assert abs(lo - ev.min()) <= 1e-10 * (1 + abs(a) + n * abs(b))
    if verdict == "elliptic":
        assert ev.min() > 0
    elif verdict == "not_elliptic":
        assert ev.min() < 0
