"""Built-in verification matrix.

Each criterion returns a :class:`CriterionResult`; ``ryflow verify`` and the
test suite both call into here. Tolerances are fixed constants, and the
discretisation budgets of the fixture runs (``c_disc``, ``c_vol``) were frozen
from pilot runs at the coarsest resolution before these checks were written.
"""

from __future__ import annotations

import functools
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ryflow import diagnostics, oracles, symbol
from ryflow.flow import IntegratorConfig, run
from ryflow.geometry import (
    AlgebraicCurvature,
    ConformalTorusState,
    WarpedProductState,
    b_identity_residual,
    curvature,
    decomposition_residual,
    kulkarni_nomizu,
    warped_algebraic_curvature,
    weyl_from_rm,
    weyl_trace,
)
from ryflow.output import records_csv
from ryflow.params import FlowParams

SEED = 20240917
# round-off floor for the traceless Ricci of Einstein data (R/n is inexact)
EINSTEIN_F_TOL = 1e-15


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""
    seconds: float = 0.0

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return (
            f"[{tag}] {self.number:2d} {self.name}: value={self.value:.3e} "
            f"threshold={self.threshold:.3e} ({self.seconds:.1f}s) {self.detail}"
        )

    def to_json(self):
        return {
            "number": self.number,
            "name": self.name,
            "passed": bool(self.passed),
            "value": float(self.value),
            "threshold": float(self.threshold),
            "detail": self.detail,
            "seconds": round(self.seconds, 3),
        }


def _timed(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        return CriterionResult(**{**res.__dict__, "seconds": time.perf_counter() - t0})

    return wrapper


# ---------------------------------------------------------------------------
# fixture runs


@dataclass(frozen=True)
class Fixture:
    name: str
    params: FlowParams
    make_state: Callable
    t_end: float
    c_disc: float = 1.0
    c_vol: float = 1e-3
    record_every: int = 1
    extra: dict = field(default_factory=dict)

    @property
    def geometry(self):
        return "conformal2d" if self.params.dim == 2 else "warped"


def _torus(n, amp, mode=1):
    return lambda: ConformalTorusState.cosine(n, amp, mode)


def _warped(n, dim, r0, amp, mode=1):
    return lambda: WarpedProductState.from_functions(n, dim, lambda s: r0 + amp * np.sin(mode * s))


FIXTURES = (
    Fixture("torus-ricci", FlowParams(1.0, 0.0, 2), _torus(32, 0.3), 0.5),
    Fixture("torus-beta-pos", FlowParams(1.0, 0.5, 2), _torus(32, 0.3), 0.5),
    Fixture("torus-beta-neg", FlowParams(1.0, -0.5, 2), _torus(32, 0.3), 0.5),
    Fixture("torus-mode2", FlowParams(0.5, 0.25, 2), _torus(32, 0.2, 2), 0.3),
    Fixture("warped4-ricci", FlowParams(1.0, 0.0, 4), _warped(64, 4, 2.0, 0.5), 0.3),
    Fixture("warped4-beta-pos", FlowParams(1.0, 0.5, 4), _warped(64, 4, 2.0, 0.5), 0.2),
    Fixture("warped4-beta-neg", FlowParams(1.0, -0.2, 4), _warped(64, 4, 2.0, 0.5), 0.3),
    Fixture("warped3-beta-pos", FlowParams(1.0, 0.3, 3), _warped(64, 3, 2.0, 0.5), 0.3),
    Fixture("warped5-beta-neg", FlowParams(1.0, -0.1, 5), _warped(64, 5, 3.0, 0.4, 2), 0.2),
)

FIXTURE_BY_NAME = {f.name: f for f in FIXTURES}


def execute_fixture(fx: Fixture):
    return run(fx.make_state(), fx.params, IntegratorConfig(t_end=fx.t_end, record_every=fx.record_every))


@functools.lru_cache(maxsize=None)
def fixture_outcome(name):
    return execute_fixture(FIXTURE_BY_NAME[name])


def discretisation_scale(outcome):
    """h^2 + dt_max of a run."""
    recs = outcome.records
    return recs[0].h ** 2 + max(r.dt for r in recs)


# ---------------------------------------------------------------------------
# criteria


@_timed
def symbol_spectrum_criterion(n_samples=200, n_lambda=50, dims=range(2, 9)):
    rng = np.random.default_rng(SEED)
    worst_eig, worst_det = 0.0, 0.0
    for n in dims:
        for _ in range(n_samples):
            alpha = rng.uniform(0.05, 3.0)
            beta = -alpha / (n - 1) + rng.uniform(1e-3, 3.0)
            p = FlowParams(alpha, beta, n)
            m = symbol.build_symbol_matrix(p)
            ev = np.sort(np.linalg.eigvals(m.entries).real)
            size = m.size
            expected = np.sort([alpha] * (size - 1) + [p.trace_speed])
            worst_eig = max(worst_eig, float(np.max(np.abs(ev - expected))))
            span = 10.0 * (abs(alpha) + n * abs(beta))
            for lam in rng.uniform(-span, span, n_lambda):
                num = symbol.det_V_minus(p, lam)
                exact = symbol.char_poly_V(p, lam)
                rel = abs(num - exact) / symbol.char_poly_scale(p, lam)
                worst_det = max(worst_det, rel)
    ok = worst_eig <= 1e-10 and worst_det <= 1e-9
    return CriterionResult(
        1, "symbol spectrum", ok, max(worst_eig / 1e-10, worst_det / 1e-9), 1.0,
        f"max eigen error {worst_eig:.2e} (tol 1e-10), max det rel error {worst_det:.2e} (tol 1e-9)",
    )


@_timed
def einstein_lifetime_criterion(n_samples=500):
    rng = np.random.default_rng(SEED + 1)
    worst = -math.inf
    for _ in range(n_samples):
        n = int(rng.integers(3, 7))
        alpha = rng.uniform(0.05, 3.0)
        beta = -alpha / (n - 1) + rng.uniform(1e-3, 3.0)
        p = FlowParams(alpha, beta, n)
        fam = oracles.EinsteinFamily(rng.uniform(0.05, 5.0), rng.uniform(0.1, 5.0), n)
        T = oracles.einstein_extinction_time(fam, p)
        bound = oracles.blow_up_bound(fam.initial_scalar, p)
        worst = max(worst, T - bound)
    ok = worst <= 1e-12
    return CriterionResult(
        2, "Einstein lifetime vs blow-up bound", ok, worst, 1e-12,
        "max over samples of (extinction time - bound)",
    )


def product_error(dt, params=None, t_end=0.2, n=8):
    params = params or FlowParams(1.0, 0.0, 4)
    out = run(
        WarpedProductState.product(n, params.dim),
        params,
        IntegratorConfig(t_end=t_end, dt_max=dt, record_every=10**9),
    )
    ex = oracles.product_metric_solution(1.0, 1.0, params, out.t_final)
    st = out.final_state
    return max(float(np.max(np.abs(st.psi - ex.psi))), float(np.max(np.abs(st.phi - ex.phi))))


@_timed
def integrator_order_criterion():
    dts = (1e-3, 5e-4, 2.5e-4)
    errs = [product_error(dt) for dt in dts]
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1)]
    p = FlowParams(1.0, 0.0, 4)
    dt = 1e-3
    out = run(WarpedProductState.product(8, 4), p, IntegratorConfig(t_end=1.0, dt_max=dt, record_every=10**9))
    T = oracles.product_extinction_time(1.0, p)
    gap = abs(out.t_final - T)
    ok_order = all(abs(o - 4.0) <= 0.5 for o in orders)
    ok_ext = gap <= 2 * dt and out.status in ("blowup_detected", "degenerate_metric")
    return CriterionResult(
        3, "RK4 temporal order on product metric", ok_order and ok_ext, min(orders), 3.5,
        f"errors {['%.2e' % e for e in errs]}, orders {['%.3f' % o for o in orders]}, "
        f"extinction at {out.t_final:.5f} vs {T} ({out.status})",
    )


def torus_residuals(grids=(32, 64, 128), t_end=0.1, params=None):
    params = params or FlowParams(1.0, 0.0, 2)
    res = []
    for n in grids:
        out = run(ConformalTorusState.cosine(n, 0.3), params, IntegratorConfig(t_end=t_end))
        res.append(max(r.res_R_evol for r in out.records if math.isfinite(r.res_R_evol)))
    return res


@_timed
def residual_order_criterion():
    res = torus_residuals()
    orders = [math.log2(res[i] / res[i + 1]) for i in range(len(res) - 1)]
    return CriterionResult(
        4, "scalar curvature evolution residual order", min(orders) >= 1.7, min(orders), 1.7,
        f"residuals {['%.2e' % r for r in res]}, orders {['%.3f' % o for o in orders]}",
    )


@_timed
def maximum_principle_criterion(fixtures=FIXTURES):
    # excursion = how far R_min dips below its bounds, in units of the run's tol
    worst, bad = 0.0, []
    for fx in fixtures:
        out = fixture_outcome(fx.name)
        tol = fx.c_disc * discretisation_scale(out)
        a = out.records[0].R_min
        rep = diagnostics.scalar_min_monitor(out.records, a, fx.params, tol)
        worst = max(worst, 1.0 - rep.worst_margin / tol)
        if not rep.passed or out.status != "reached_t_end":
            bad.append(f"{fx.name}: {rep.detail or out.status}")
    return CriterionResult(
        5, "maximum principle suite", not bad, worst, 1.0,
        "; ".join(bad) or f"{len(fixtures)} runs, worst excursion {worst:.3f} x C_disc(h^2+dt)",
    )


@_timed
def volume_identity_criterion(fixtures=FIXTURES):
    worst, bad, drift2d = math.inf, [], 0.0
    for fx in fixtures:
        out = fixture_outcome(fx.name)
        tol = fx.c_vol * discretisation_scale(out)
        conserve = 1e-12 if fx.params.dim == 2 else None
        rep = diagnostics.volume_rate_monitor(out.records, tol, conserve_tol=conserve)
        if conserve is not None:
            drift2d = max(drift2d, rep.extra["volume_drift"])
        worst = min(worst, rep.worst_margin)
        if not rep.passed:
            bad.append(f"{fx.name}: {rep.detail}")
    return CriterionResult(
        6, "volume identity", not bad, drift2d, 1e-12,
        "; ".join(bad) or f"torus volume drift {drift2d:.2e}; all residuals within tolerance",
    )


def random_curvature(rng, dim, terms=4):
    """Generic algebraic curvature tensor: sum of Kulkarni-Nomizu squares."""
    rm = np.zeros((dim,) * 4)
    for _ in range(terms):
        a = rng.normal(size=(dim, dim))
        b = rng.normal(size=(dim, dim))
        rm += 0.5 * kulkarni_nomizu(a + a.T, b + b.T)
    return AlgebraicCurvature(dim, rm)


def random_warped_state(rng, dim, n=32):
    s = np.linspace(0, 2 * np.pi, n, endpoint=False)
    r0 = rng.uniform(1.5, 3.0)
    psi = r0 + sum(rng.uniform(-0.15, 0.15) * np.sin(k * s + rng.uniform(0, 6.3)) for k in (1, 2, 3))
    phi = 1.0 + sum(rng.uniform(-0.1, 0.1) * np.cos(k * s + rng.uniform(0, 6.3)) for k in (1, 2))
    return WarpedProductState(phi, psi, dim)


def tensor_decomposition_residual(curv: AlgebraicCurvature):
    n = curv.dim
    ric = curv.ricci()
    R = float(np.trace(ric))
    W = weyl_from_rm(curv)
    ric0 = ric - R / n * np.eye(n)
    rm2 = float(np.sum(curv.rm**2))
    rhs = float(np.sum(W**2)) + 4 / (n - 2) * float(np.sum(ric0**2)) + 2 / (n * (n - 1)) * R**2
    return abs(rm2 - rhs) / (1 + rm2)


@_timed
def algebraic_identities_criterion(n_warped=200):
    rng = np.random.default_rng(SEED + 2)
    b_res = 0.0
    for n in range(2, 7):
        b_res = max(b_res, b_identity_residual(AlgebraicCurvature.space_form(n, rng.uniform(-2, 2))))
    trace, w3, decomp = 0.0, 0.0, 0.0
    for i in range(n_warped):
        dim = 3 + i % 4
        st = random_warped_state(rng, dim)
        idx = int(rng.integers(st.n))
        curv = warped_algebraic_curvature(st, idx)
        b_res = max(b_res, b_identity_residual(curv))
        trace = max(trace, weyl_trace(weyl_from_rm(curv)))
        fields = curvature(st)
        decomp = max(decomp, float(np.max(decomposition_residual(fields))))
        if dim == 3:
            w3 = max(w3, float(np.max(fields.weyl_norm2 / (1 + fields.rm_norm2))))
    for i in range(100):
        dim = 3 + i % 4
        curv = random_curvature(rng, dim)
        b_res = max(b_res, b_identity_residual(curv))
        W = weyl_from_rm(curv)
        trace = max(trace, weyl_trace(W))
        decomp = max(decomp, tensor_decomposition_residual(curv))
        if dim == 3:
            w3 = max(w3, float(np.max(np.abs(W))))
    ok = b_res <= 1e-10 and trace <= 1e-10 and w3 <= 1e-12 and decomp <= 1e-9
    worst = max(b_res / 1e-10, trace / 1e-10, w3 / 1e-12, decomp / 1e-9)
    return CriterionResult(
        7, "algebraic curvature identities", ok, worst, 1.0,
        f"B identity {b_res:.1e}, Weyl trace {trace:.1e}, dim-3 Weyl {w3:.1e}, "
        f"decomposition {decomp:.1e}",
    )


def einstein_pinching(dim, K):
    """f = |Ric - R g/n|^2 / (R + b)^2 for a space form (Einstein) tensor."""
    curv = AlgebraicCurvature.space_form(dim, K)
    ric = curv.ricci()
    R = float(np.trace(ric))
    b = 2.0 * abs(R) + 1.0
    return float(np.sum((ric - R / dim * np.eye(dim)) ** 2)) / (R + b) ** 2


@_timed
def pinching_criterion(fixtures=FIXTURES):
    worst, bad = math.inf, []
    for fx in fixtures:
        if fx.params.dim < 3:
            continue
        out = fixture_outcome(fx.name)
        rep = diagnostics.pinching_record_monitor(out.records, tol=1e-9)
        worst = min(worst, rep.worst_margin)
        if not rep.passed:
            bad.append(f"{fx.name}: {rep.detail}")
    f_einstein = max(einstein_pinching(dim, K) for dim in (3, 4, 5) for K in (-0.5, 0.7))
    if f_einstein > EINSTEIN_F_TOL:
        bad.append(f"Einstein data f = {f_einstein}")
    return CriterionResult(
        8, "pinching normalisation R + b >= 1", not bad, worst, 0.0,
        "; ".join(bad) or f"min (R + b) - (1 - 1e-9) = {worst:.3f}; Einstein f <= {f_einstein:.1e}",
    )


@_timed
def stationarity_criterion(fixtures=FIXTURES, n=32, t_end=1.0):
    worst = 0.0
    seen = set()
    for fx in fixtures:
        key = (fx.params.alpha, fx.params.beta)
        if key in seen:
            continue
        seen.add(key)
        p = FlowParams(fx.params.alpha, fx.params.beta, 2)
        start = ConformalTorusState.flat(n)
        out = run(start, p, IntegratorConfig(t_end=t_end, record_every=10**9))
        rate = float(np.max(np.abs(out.final_state.u - start.u))) / out.t_final
        worst = max(worst, rate)
        if out.status != "reached_t_end":
            worst = math.inf
    return CriterionResult(
        9, "flat torus stationarity", worst < 1e-12, worst, 1e-12,
        f"{len(seen)} parameter pairs, max |du| per unit time {worst:.1e}",
    )


@_timed
def determinism_criterion(fixtures=FIXTURES):
    bad = [fx.name for fx in fixtures
           if records_csv(fixture_outcome(fx.name).records) != records_csv(execute_fixture(fx).records)]
    return CriterionResult(
        10, "byte-identical CSV across serial runs", not bad, float(len(bad)), 0.0,
        ("differs: " + ", ".join(bad)) if bad else f"{len(fixtures)} fixtures identical",
    )


CRITERIA = (
    symbol_spectrum_criterion,
    einstein_lifetime_criterion,
    integrator_order_criterion,
    residual_order_criterion,
    maximum_principle_criterion,
    volume_identity_criterion,
    algebraic_identities_criterion,
    pinching_criterion,
    stationarity_criterion,
    determinism_criterion,
)


# ---------------------------------------------------------------------------
# named scenarios for the CLI


@_timed
def sphere_ode_check():
    """Round S^3 under Ricci flow: c = 1 - 4t, lifetime 1/4 <= bound 1, and
    R(t) = 6/(1-4t) above the comparison solution; then monitor a synthetic
    record series built from the exact solution."""
    p = FlowParams(1.0, 0.0, 3)
    fam = oracles.EinsteinFamily(2.0, 1.0, 3)
    ts = np.linspace(0.0, 0.24, 49)
    err = max(abs(oracles.einstein_scale(fam, p, t) - (1 - 4 * t)) for t in ts)
    T = oracles.einstein_extinction_time(fam, p)
    bound = oracles.blow_up_bound(6.0, p)
    records = [
        diagnostics.FlowRecord(t=float(t), dt=0.005, R_min=oracles.einstein_scalar(fam, p, t),
                               R_max=oracles.einstein_scalar(fam, p, t), volume=1.0, f_max=0.0)
        for t in ts
    ]
    rep = diagnostics.scalar_min_monitor(records, 6.0, p, tol=0.0)
    ok = err <= 1e-15 and abs(T - 0.25) <= 1e-15 and bound == 1.0 and rep.passed
    return CriterionResult(
        0, "sphere ODE oracle", ok, err, 1e-15,
        f"T* = {T}, bound = {bound}, comparison margin {rep.worst_margin:.3e}",
    )


@_timed
def torus_gaussbonnet_check(n=32):
    p = FlowParams(1.0, 0.0, 2)
    out = run(ConformalTorusState.cosine(n, 0.3), p, IntegratorConfig(t_end=0.5))
    drift = diagnostics.volume_drift(out.records)
    int_r = max(abs(r.int_R_dvol) for r in out.records)
    return CriterionResult(
        0, "torus Gauss-Bonnet volume conservation", drift <= 1e-12, drift, 1e-12,
        f"max |int R dVol| = {int_r:.1e}",
    )


SCENARIOS = {
    "sphere-ode": (sphere_ode_check, einstein_lifetime_criterion),
    "torus-gaussbonnet": (torus_gaussbonnet_check,),
    "symbol-sweep": (symbol_spectrum_criterion,),
    "product-lifetime": (integrator_order_criterion,),
    "torus-residual": (residual_order_criterion,),
    "maximum-principle": (maximum_principle_criterion,),
    "volume": (volume_identity_criterion,),
    "algebraic": (algebraic_identities_criterion,),
    "pinching": (pinching_criterion,),
    "stationarity": (stationarity_criterion,),
    "determinism": (determinism_criterion,),
    "all": CRITERIA,
}


def run_scenario(name):
    return [check() for check in SCENARIOS[name]]
