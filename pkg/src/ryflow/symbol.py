"""Principal symbol of the gauge-fixed linearised flow operator.

With xi = e_1 in an orthonormal frame the symbol acts on symmetric h by

    h_ik -> alpha h_ik + beta (delta_ik tr h - h_11 delta_ik),

which in the basis (h_11, ..., h_nn, h_12, ..., h_(n-1)n) is the block matrix
U (+) alpha Id. Its eigenvalues are alpha (multiplicity n(n+1)/2 - 1) and
alpha + (n-1) beta (multiplicity 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from ryflow.params import FlowParams

BOUNDARY_TOL = 1e-14


@dataclass(frozen=True)
class SymbolMatrix:
    dim: int
    entries: np.ndarray

    @property
    def size(self) -> int:
        return self.dim * (self.dim + 1) // 2

    @property
    def V(self):
        """Trailing (n-1) x (n-1) block of U."""
        n = self.dim
        return self.entries[1:n, 1:n]


def basis_pairs(dim):
    """Index pairs of the symmetric-matrix basis: diagonal first, then i < j."""
    return [(i, i) for i in range(dim)] + list(combinations(range(dim), 2))


def sym_to_vec(h):
    h = np.asarray(h)
    return np.array([h[i, j] for i, j in basis_pairs(h.shape[0])])


def vec_to_sym(v, dim):
    h = np.zeros((dim, dim))
    for (i, j), x in zip(basis_pairs(dim), v):
        h[i, j] = h[j, i] = x
    return h


def build_symbol_matrix(params: FlowParams) -> SymbolMatrix:
    n = params.dim
    a, b = params.alpha, params.beta
    size = n * (n + 1) // 2
    m = np.zeros((size, size))
    m[0, 0] = a
    m[0, 1:n] = b
    m[1:n, 1:n] = b
    m[np.arange(1, n), np.arange(1, n)] = a + b
    m[np.arange(n, size), np.arange(n, size)] = a
    return SymbolMatrix(n, m)


def apply_symbol(h, xi, params: FlowParams):
    """Symbol of the gauge-fixed operator applied to h for covector xi:

        alpha |xi|^2 h_ik + beta (|xi|^2 tr h - xi_j xi_l h_jl) delta_ik.
    """
    h = np.asarray(h, dtype=float)
    xi = np.asarray(xi, dtype=float)
    xx = float(xi @ xi)
    n = h.shape[0]
    return params.alpha * xx * h + params.beta * (xx * np.trace(h) - xi @ h @ xi) * np.eye(n)


def symbol_spectrum(m: SymbolMatrix, tol=1e-10):
    """Eigenvalues of the (non-symmetric) symbol matrix grouped into
    ``[(value, multiplicity), ...]`` sorted by value; values within ``tol``
    (relative to the spectral scale) are merged."""
    ev = np.linalg.eigvals(m.entries)
    if np.max(np.abs(ev.imag), initial=0.0) > 1e-8 * (1 + np.max(np.abs(ev.real))):
        raise np.linalg.LinAlgError("symbol matrix produced complex eigenvalues")
    vals = np.sort(ev.real)
    scale = 1.0 + float(np.max(np.abs(vals)))
    groups = []
    for v in vals:
        if groups and abs(v - groups[-1][-1]) <= tol * scale:
            groups[-1].append(v)
        else:
            groups.append([v])
    return [(float(np.mean(g)), len(g)) for g in groups]


def expected_spectrum(params: FlowParams):
    n = params.dim
    size = n * (n + 1) // 2
    a, top = params.alpha, params.trace_speed
    if a == top:
        return [(a, size)]
    return sorted([(a, size - 1), (top, 1)])


def char_poly_V(params: FlowParams, lam: float) -> float:
    """det(V - lam I) = (alpha - lam)^(n-2) (alpha + (n-1) beta - lam)."""
    n = params.dim
    return (params.alpha - lam) ** (n - 2) * (params.trace_speed - lam)


def det_V_minus(params: FlowParams, lam: float) -> float:
    """Numeric determinant of V - lam I from the assembled symbol matrix."""
    V = build_symbol_matrix(params).V
    return float(np.linalg.det(V - lam * np.eye(V.shape[0])))


def char_poly_scale(params: FlowParams, lam: float) -> float:
    """Cancellation-free magnitude used to measure relative determinant error."""
    n = params.dim
    return (abs(params.alpha) + abs(lam)) ** (n - 2) * (
        abs(params.alpha) + (n - 1) * abs(params.beta) + abs(lam)
    )


def is_strongly_elliptic(params: FlowParams):
    """Return (verdict, smallest symbol eigenvalue).

    The verdict is "elliptic" when alpha > 0 and alpha + (n-1) beta > 0,
    "boundary" when the smaller of the two is zero within 1e-14, otherwise
    "not_elliptic".
    """
    lo = min(params.alpha, params.trace_speed)
    if abs(lo) <= BOUNDARY_TOL:
        return "boundary", lo
    if lo > 0:
        return "elliptic", lo
    return "not_elliptic", lo
