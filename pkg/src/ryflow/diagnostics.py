"""Run monitors: scalar-curvature minimum principle, volume rate, curvature
evolution residuals, pinching, and derivative decay.

Everything here reads immutable states/records; the integrator calls
:func:`make_record` and :func:`fill_centered` while it runs.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from ryflow import oracles
from ryflow.geometry import (
    ConformalTorusState,
    CurvatureFields,
    WarpedProductState,
    curvature,
    d2,
    sphere_area,
)

CSV_COLUMNS = (
    "t",
    "dt",
    "R_min",
    "R_max",
    "volume",
    "f_max",
    "res_R_evol",
    "res_Ric_evol",
    "decay_k1",
    "decay_k2",
)


@dataclass
class FlowRecord:
    """One row of a run's time series.

    The first ten fields are the CSV columns. ``res_*`` fields are NaN where
    no centred time difference exists (first and last rows).
    """

    t: float
    dt: float
    R_min: float
    R_max: float
    volume: float
    f_max: float
    res_R_evol: float = math.nan
    res_Ric_evol: float = math.nan
    decay_k1: float = 0.0
    decay_k2: float = 0.0
    int_R_dvol: float = 0.0
    res_vol: float = math.nan
    Rb_min: float = math.nan
    pinch_ratio: float = math.nan
    ric_hess_sup: float = 0.0
    h: float = 0.0

    def csv_row(self):
        return [getattr(self, c) for c in CSV_COLUMNS]

    def to_dict(self):
        return asdict(self)


@dataclass
class PinchingContext:
    """Shift b = 2 max|R(., 0)| + 1 making R + b >= 1 along the flow.

    ``running_max`` accumulates the denominator of the pinching diagnostic
    ratio across snapshots.
    """

    b: float
    running_max: float = 0.0

    def __post_init__(self):
        if not self.b >= 1:
            raise ValueError(f"pinching shift b must be >= 1, got {self.b}")

    @classmethod
    def from_fields(cls, fields: CurvatureFields):
        return cls(2.0 * float(np.max(np.abs(fields.R))) + 1.0)

    @classmethod
    def from_state(cls, state):
        return cls.from_fields(curvature(state))


@dataclass
class MonitorReport:
    name: str
    passed: bool
    worst_margin: float
    t_worst: float
    applicable: bool = True
    detail: str = ""
    extra: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "applicable": bool(self.applicable),
            "worst_margin": _json_float(self.worst_margin),
            "t_worst": _json_float(self.t_worst),
            "detail": self.detail,
        }


def _json_float(x):
    x = float(x)
    return x if math.isfinite(x) else None


# ---------------------------------------------------------------------------
# per-state quantities


def _metric_factor(state, fields):
    """Pointwise inverse metric coefficient along the grid directions."""
    if isinstance(state, ConformalTorusState):
        return fields.extra["conf"]
    return 1.0 / state.phi**2


def hessian_R_proxy(state, fields):
    """Pointwise max |second difference of R| / h^2, scaled to the metric."""
    h = state.h
    R = fields.R
    if isinstance(state, ConformalTorusState):
        sec = np.maximum(np.abs(d2(R, h, axis=0)), np.abs(d2(R, h, axis=1)))
    else:
        sec = np.abs(d2(R, h))
    return sec * _metric_factor(state, fields)


def integral_R_dvol(state, fields) -> float:
    if isinstance(state, ConformalTorusState):
        return float(np.sum(fields.R * np.exp(2.0 * state.u)) * state.h**2)
    w = state.phi * state.psi ** (state.dim - 1)
    return float(sphere_area(state.dim - 1) * np.sum(fields.R * w) * state.h)


def decay_proxies(state, fields):
    """sup |grad^k Rm| proxies for k = 1, 2 from differences of frame curvature."""
    if isinstance(state, ConformalTorusState):
        k1 = math.sqrt(float(np.max(fields.grad_R_norm2)))
        k2 = float(np.max(hessian_R_proxy(state, fields)))
        return k1, k2
    n = state.dim
    terms = fields.extra["terms"]
    L, K = fields.extra["L"], fields.extra["K"]
    w_mixed, w_sph = 4 * (n - 1), 2 * (n - 1) * (n - 2)
    k1 = np.sqrt(w_mixed * terms.sigma1(L) ** 2 + w_sph * terms.sigma1(K) ** 2)
    k2 = np.sqrt(w_mixed * terms.sigma2(L) ** 2 + w_sph * terms.sigma2(K) ** 2)
    return float(np.max(k1)), float(np.max(k2))


def pinching_values(state, fields, ctx: PinchingContext):
    """(f_max, min(R + b), q_max) where q = (|W|+|dR|+|d2R|)/(R+b) + R + b."""
    Rb = fields.R + ctx.b
    f = fields.ric0_norm2 / Rb**2
    q = (
        np.sqrt(fields.weyl_norm2)
        + np.sqrt(fields.grad_R_norm2)
        + hessian_R_proxy(state, fields)
    ) / Rb + Rb
    return float(np.max(f)), float(np.min(Rb)), float(np.max(q))


def make_record(state, fields, params, dt, pinch: Optional[PinchingContext]) -> FlowRecord:
    t = float(state.t)
    k1, k2 = decay_proxies(state, fields)
    ric_hess = float(np.max(np.sqrt(fields.ric_norm2) + hessian_R_proxy(state, fields)))
    rec = FlowRecord(
        t=t,
        dt=float(dt),
        R_min=float(np.min(fields.R)),
        R_max=float(np.max(fields.R)),
        volume=state.volume(),
        f_max=0.0,
        decay_k1=t * k1,
        decay_k2=t**1.5 * k2,
        int_R_dvol=integral_R_dvol(state, fields),
        ric_hess_sup=ric_hess,
        h=state.h,
    )
    if pinch is not None:
        f_max, rb_min, q_max = pinching_values(state, fields, pinch)
        pinch.running_max = max(pinch.running_max, q_max)
        rec.f_max = f_max
        rec.Rb_min = rb_min
        rec.pinch_ratio = f_max / (1.0 + pinch.running_max)
    return rec


# ---------------------------------------------------------------------------
# time-centred residuals


def centered_weights(t_prev, t, t_next):
    """Three-point second-order weights for d/dt at the middle node."""
    h1 = t - t_prev
    h2 = t_next - t
    if not (h1 > 0 and h2 > 0):
        raise ValueError("snapshots must be strictly increasing in t")
    return (-h2 / (h1 * (h1 + h2)), (h2 - h1) / (h1 * h2), h1 / (h2 * (h1 + h2)))


def _ddt(prev, cur, nxt, getter):
    w = centered_weights(prev.t, cur.t, nxt.t)
    return w[0] * getter(prev) + w[1] * getter(cur) + w[2] * getter(nxt)


def _fields(states, fields):
    if fields is None:
        return [curvature(s) for s in states]
    return list(fields)


def evolution_residual_R(prev, cur, nxt, params, fields=None) -> float:
    """max |dR/dt - ((n-1) beta + alpha) lap R - 2 alpha |Ric|^2 - beta R^2|.

    dR/dt is the centred difference through the three snapshots (unequal
    spacing allowed); all else is evaluated at the middle one.
    """
    fp, fc, fn = _fields((prev, cur, nxt), fields)
    w = centered_weights(prev.t, cur.t, nxt.t)
    dR = w[0] * fp.R + w[1] * fc.R + w[2] * fn.R
    n = params.dim
    rhs = (
        (params.beta * (n - 1) + params.alpha) * fc.lap_R
        + 2.0 * params.alpha * fc.ric_norm2
        + params.beta * fc.R**2
    )
    return float(np.max(np.abs(dR - rhs)))


def ricci_evolution_rhs(state: WarpedProductState, fields: CurvatureFields, params):
    """Predicted d/dt of the two Ricci eigenvalues (lambda_s, lambda_sphere).

    These are the frame components of the Ricci evolution, written for the
    (1,1) Ricci tensor so that the metric-variation terms cancel:

        d lambda_i / dt = alpha (lap Ric)_ii + 2 alpha sum_p K_pi lambda_p
                          + beta R lambda_i + beta/2 ((n-2) (Hess R)_ii + lap R)

    with the rough Laplacian of Ric on a warped product

        (lap Ric)_ss = lap lambda_s - 2 (n-1) k mu,
        (lap Ric)_aa = lap lambda_sphere + 2 k mu,

    where k = (psi_sigma / psi)^2 and mu = lambda_s - lambda_sphere.
    """
    n = params.dim
    a, b = params.alpha, params.beta
    terms = fields.extra["terms"]
    L, K = fields.extra["L"], fields.extra["K"]
    lam_s = fields.ric_frame[..., 0]
    lam_sph = fields.ric_frame[..., 1]
    R = fields.R
    kappa = (terms.psi_sig / terms.psi) ** 2
    mu = lam_s - lam_sph
    lap_ric_s = terms.laplacian(lam_s) - 2 * (n - 1) * kappa * mu
    lap_ric_a = terms.laplacian(lam_sph) + 2 * kappa * mu
    hess_s = terms.sigma2(R)
    hess_a = (terms.psi_sig / terms.psi) * terms.sigma1(R)
    lapR = fields.lap_R
    rhs_s = (
        a * lap_ric_s
        + 2 * a * (n - 1) * L * lam_sph
        + b * R * lam_s
        + 0.5 * b * ((n - 2) * hess_s + lapR)
    )
    rhs_a = (
        a * lap_ric_a
        + 2 * a * (L * lam_s + (n - 2) * K * lam_sph)
        + b * R * lam_sph
        + 0.5 * b * ((n - 2) * hess_a + lapR)
    )
    return rhs_s, rhs_a


def evolution_residual_ric(prev, cur, nxt, params, fields=None) -> float:
    """Ricci-eigenvalue evolution residual (warped products only)."""
    if not isinstance(cur, WarpedProductState):
        raise TypeError("Ricci eigenvalue residual is defined for warped products")
    fp, fc, fn = _fields((prev, cur, nxt), fields)
    w = centered_weights(prev.t, cur.t, nxt.t)
    d_ric = w[0] * fp.ric_frame + w[1] * fc.ric_frame + w[2] * fn.ric_frame
    rhs_s, rhs_a = ricci_evolution_rhs(cur, fc, params)
    return float(
        max(np.max(np.abs(d_ric[..., 0] - rhs_s)), np.max(np.abs(d_ric[..., 1] - rhs_a)))
    )


def volume_rate_residual(prev, cur, nxt, params, fields=None) -> float:
    """|dVol/dt + (alpha + n beta/2) int R dVol| / (1 + |int R dVol|)."""
    fc = curvature(cur) if fields is None else fields[1]
    dvol = _ddt(prev, cur, nxt, lambda s: s.volume())
    int_r = integral_R_dvol(cur, fc)
    res = dvol + (params.alpha + 0.5 * params.dim * params.beta) * int_r
    return abs(res) / (1.0 + abs(int_r))


def fill_centered(rec: FlowRecord, before, current, after, params):
    """Populate the centred residual fields of ``rec`` from (state, fields) pairs."""
    states = (before[0], current[0], after[0])
    fl = (before[1], current[1], after[1])
    rec.res_R_evol = evolution_residual_R(*states, params, fields=fl)
    rec.res_vol = volume_rate_residual(*states, params, fields=fl)
    if isinstance(current[0], WarpedProductState):
        rec.res_Ric_evol = evolution_residual_ric(*states, params, fields=fl)


# ---------------------------------------------------------------------------
# monitors


def scalar_min_monitor(records, a, params, tol) -> MonitorReport:
    """Minimum principle for R: R_min(t) >= a, nondecreasing, and above the
    comparison solution when a > 0 and n >= 3, each up to ``tol``."""
    worst, t_worst, why = math.inf, math.nan, ""

    def consider(margin, t, what):
        nonlocal worst, t_worst, why
        if margin < worst:
            worst, t_worst, why = margin, t, what

    bound_T = oracles.blow_up_bound(a, params)
    for i, rec in enumerate(records):
        consider(rec.R_min - a + tol, rec.t, "R_min below initial minimum")
        if i:
            consider(rec.R_min - records[i - 1].R_min + tol, rec.t, "R_min decreased")
        if a > 0 and params.dim >= 3 and rec.t < bound_T:
            cmp = oracles.scalar_min_comparison(a, params, rec.t)
            consider(rec.R_min - cmp + tol, rec.t, "R_min below comparison solution")
    passed = worst >= 0
    return MonitorReport(
        "scalar_min",
        passed,
        worst,
        t_worst,
        detail="" if passed else why,
        extra={"a": a, "tol": tol},
    )


def volume_rate_monitor(records, tol, conserve_tol=None) -> MonitorReport:
    """Checks the recorded volume-rate residuals against ``tol``.

    With ``conserve_tol`` also requires |Vol(t) - Vol(0)| / Vol(0) to stay
    below it (total volume is conserved on the torus).
    """
    worst, t_worst, why = math.inf, math.nan, ""
    for rec in records:
        if math.isfinite(rec.res_vol):
            m = tol - rec.res_vol
            if m < worst:
                worst, t_worst, why = m, rec.t, "volume rate identity violated"
    drift = volume_drift(records)
    if conserve_tol is not None:
        m = conserve_tol - drift
        if m < worst:
            worst, t_worst, why = m, records[-1].t, "total volume not conserved"
    if worst == math.inf:
        worst = tol
    passed = worst >= 0
    return MonitorReport(
        "volume_rate",
        passed,
        worst,
        t_worst,
        detail="" if passed else why,
        extra={"tol": tol, "volume_drift": drift},
    )


def volume_drift(records) -> float:
    v0 = records[0].volume
    return max(abs(r.volume - v0) for r in records) / v0


def pinching_monitor(snapshots, ctx: PinchingContext, tol=1e-9):
    """f_max series and the R + b >= 1 check over state snapshots.

    Returns ``(report, f_max_series, ratio_series)``. The ratio
    f_max / (1 + running max of (|W|+|dR|+|d2R|)/(R+b) + R + b) is only
    reported. Two-dimensional input is refused (not applicable, f = 0).
    """
    if snapshots and snapshots[0].dim < 3:
        rep = MonitorReport(
            "pinching", True, math.inf, math.nan, applicable=False,
            detail="pinching needs dim >= 3 (traceless Ricci vanishes in 2D)",
        )
        return rep, [0.0] * len(snapshots), [0.0] * len(snapshots)
    f_series, ratios = [], []
    worst, t_worst = math.inf, math.nan
    running = ctx.running_max
    for st in snapshots:
        f_max, rb_min, q_max = pinching_values(st, curvature(st), ctx)
        running = max(running, q_max)
        f_series.append(f_max)
        ratios.append(f_max / (1.0 + running))
        m = rb_min - (1.0 - tol)
        if m < worst:
            worst, t_worst = m, st.t
    finite = all(math.isfinite(x) for x in f_series + ratios)
    passed = worst >= 0 and finite
    rep = MonitorReport(
        "pinching", passed, worst, t_worst,
        detail="" if passed else ("R + b < 1" if worst < 0 else "non-finite pinching"),
    )
    return rep, f_series, ratios


def pinching_record_monitor(records, tol=1e-9) -> MonitorReport:
    """R + b >= 1 - tol and finite f_max over recorded rows."""
    rows = [r for r in records if math.isfinite(r.Rb_min)]
    if not rows:
        return MonitorReport("pinching", True, math.inf, math.nan, applicable=False,
                             detail="pinching needs dim >= 3")
    worst_rec = min(rows, key=lambda r: r.Rb_min)
    worst = worst_rec.Rb_min - (1.0 - tol)
    finite = all(math.isfinite(r.f_max) and math.isfinite(r.pinch_ratio) for r in rows)
    passed = worst >= 0 and finite
    return MonitorReport(
        "pinching", passed, worst, worst_rec.t,
        detail="" if passed else ("R + b < 1" if worst < 0 else "non-finite pinching"),
        extra={"f_max": max(r.f_max for r in rows)},
    )


def derivative_decay_monitor(snapshots):
    """max over t > 0 of t^((k+1)/2) sup|grad^k Rm| proxy, k = 1, 2.

    Diagnostic only: reports the running maxima and whether they are finite.
    """
    out = {1: 0.0, 2: 0.0}
    for st in snapshots:
        if st.t <= 0:
            continue
        k1, k2 = decay_proxies(st, curvature(st))
        out[1] = max(out[1], st.t * k1)
        out[2] = max(out[2], st.t**1.5 * k2)
    return out


def derivative_decay_record_monitor(records) -> MonitorReport:
    vals = [(r.decay_k1, r.decay_k2) for r in records if r.t > 0]
    finite = all(math.isfinite(a) and math.isfinite(b) for a, b in vals)
    k1 = max((a for a, _ in vals), default=0.0)
    k2 = max((b for _, b in vals), default=0.0)
    return MonitorReport(
        "derivative_decay", finite, 0.0 if finite else -math.inf, math.nan,
        detail="" if finite else "non-finite derivative proxy",
        extra={"decay_k1": k1, "decay_k2": k2},
    )
