"""Method-of-lines time integration of dg/dt = -2 alpha Ric - beta R g.

On the torus the flow stays conformal and reduces to

    du/dt = -(alpha + beta) R / 2 = (alpha + beta) exp(-2u) lap_flat(u).

The RK4 stepper advances the area density w = exp(2u), for which
dw/dt = (alpha + beta) lap_flat(log(w) / 2) sums to zero over the grid; as
a linear invariant, total area is then kept to round-off. Forward Euler
steps u itself, so that one step is literally u + dt du/dt.

On warped products it preserves the warped form and reduces to

    dphi/dt = -(alpha lambda_s + beta R / 2) phi,
    dpsi/dt = -(alpha lambda_sphere + beta R / 2) psi.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ryflow import diagnostics
from ryflow.errors import DegenerateMetricError, InvalidStateError, RegimeError
from ryflow.geometry import (
    ConformalTorusState,
    WarpedProductState,
    check_positive,
    curvature,
    curvature_conformal2d,
    curvature_warped,
)
from ryflow.params import FlowParams

log = logging.getLogger(__name__)

SCHEMES = ("rk4", "euler")
STATUSES = ("reached_t_end", "blowup_detected", "degenerate_metric", "max_steps")


@dataclass(frozen=True)
class IntegratorConfig:
    """Time-stepping controls.

    ``dt_max`` optionally caps the step below the stability bound; it is how
    convergence studies pin a fixed step.
    """

    t_end: float
    cfl_safety: float = 0.2
    max_steps: int = 1_000_000
    blowup_R_cap: float = 1e6
    record_every: int = 1
    scheme: str = "rk4"
    dt_max: Optional[float] = None

    def __post_init__(self):
        if not self.cfl_safety > 0 or self.cfl_safety > 1:
            raise ValueError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if not self.blowup_R_cap > 0:
            raise ValueError(f"blowup_R_cap must be positive, got {self.blowup_R_cap}")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.dt_max is not None and not self.dt_max > 0:
            raise ValueError("dt_max must be positive")


@dataclass
class RunOutcome:
    status: str
    t_final: float
    records: list
    final_state: object
    params: FlowParams
    message: str = ""
    pinching: Optional[diagnostics.PinchingContext] = None
    snapshots: list = field(default_factory=list)


class StepFailure(Exception):
    def __init__(self, status, message):
        self.status = status
        super().__init__(message)


def _check_dims(state, params):
    if isinstance(state, ConformalTorusState):
        if params.dim != 2:
            raise ValueError(f"conformal torus flow needs params.dim == 2, got {params.dim}")
    elif isinstance(state, WarpedProductState):
        if params.dim != state.dim:
            raise ValueError(
                f"params.dim = {params.dim} does not match state dim {state.dim}"
            )
    else:
        raise TypeError(f"unsupported state type {type(state).__name__}")


def rhs_conformal2d(state: ConformalTorusState, params: FlowParams) -> np.ndarray:
    if params.dim != 2:
        raise ValueError(f"conformal torus flow needs params.dim == 2, got {params.dim}")
    R = curvature_conformal2d(state, full=False).R
    return -0.5 * (params.alpha + params.beta) * R


def rhs_warped(state: WarpedProductState, params: FlowParams):
    """(dphi/dt, dpsi/dt); degenerate profiles raise DegenerateMetricError."""
    _check_dims(state, params)
    fields = curvature_warped(state, full=False)
    lam_s = fields.ric_frame[..., 0]
    lam_sph = fields.ric_frame[..., 1]
    half_beta_R = 0.5 * params.beta * fields.R
    dphi = -(params.alpha * lam_s + half_beta_R) * state.phi
    dpsi = -(params.alpha * lam_sph + half_beta_R) * state.psi
    return dphi, dpsi


def stable_dt(state, params: FlowParams, config: IntegratorConfig) -> float:
    """cfl_safety * h^2 / (2 D_max) evaluated at ``state``.

    D_max is max(alpha, alpha+(n-1)beta) times the largest inverse metric
    coefficient along the grid (exp(-2u) or 1/phi^2).
    """
    d = params.max_diffusivity
    if d <= 0:
        # outside the parabolic regime; keep a finite step from the magnitudes
        d = max(abs(params.alpha), abs(params.trace_speed))
    if isinstance(state, ConformalTorusState):
        d *= float(np.max(np.exp(-2.0 * state.u)))
    else:
        d *= float(np.max(1.0 / state.phi**2))
    if d == 0 or not math.isfinite(d):
        return math.inf
    return config.cfl_safety * state.h**2 / (2.0 * d)


def _pack(state, scheme):
    if isinstance(state, ConformalTorusState):
        return np.exp(2.0 * state.u) if scheme == "rk4" else state.u
    return np.stack([state.phi, state.psi])


def _density_to_u(w):
    if not np.all(np.isfinite(w)) or np.min(w) <= 0:
        raise InvalidStateError("area density left (0, inf) during stage evaluation")
    return 0.5 * np.log(w)


def _unpack(template, y, t, scheme):
    if isinstance(template, ConformalTorusState):
        return ConformalTorusState(_density_to_u(y) if scheme == "rk4" else y, t)
    return WarpedProductState(y[0], y[1], template.dim, t)


def _rhs(template, params, scheme):
    if isinstance(template, ConformalTorusState):
        if scheme != "rk4":
            return lambda u, t: rhs_conformal2d(ConformalTorusState(u, t), params)

        def g(w, t):
            u = _density_to_u(w)
            return 2.0 * w * rhs_conformal2d(ConformalTorusState(u, t), params)

        return g

    def f(y, t):
        if not np.all(np.isfinite(y)):
            raise InvalidStateError("non-finite profile during stage evaluation")
        return np.stack(rhs_warped(WarpedProductState(y[0], y[1], template.dim, t), params))

    return f


def step(state, params: FlowParams, config: IntegratorConfig, dt: Optional[float] = None):
    """Advance one RK4 (or forward Euler) step.

    ``dt`` defaults to ``min(stable_dt, config.dt_max)``; an explicit ``dt``
    larger than the stability bound is rejected.

    Raises
    ------
    StepFailure
        With status ``blowup_detected`` on non-finite output and
        ``degenerate_metric`` when a profile crosses the positivity floor.
    """
    _check_dims(state, params)
    bound = stable_dt(state, params, config)
    if dt is None:
        dt = bound if config.dt_max is None else min(bound, config.dt_max)
    elif dt > bound * (1 + 1e-12):
        raise ValueError(f"dt = {dt} exceeds the stability bound {bound}")
    if not math.isfinite(dt):
        raise ValueError("no finite step size available; set dt_max")
    f = _rhs(state, params, config.scheme)
    y = _pack(state, config.scheme)
    t = state.t
    try:
        if config.scheme == "euler":
            y_new = y + dt * f(y, t)
        else:
            k1 = f(y, t)
            k2 = f(y + 0.5 * dt * k1, t + 0.5 * dt)
            k3 = f(y + 0.5 * dt * k2, t + 0.5 * dt)
            k4 = f(y + dt * k3, t + dt)
            y_new = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    except DegenerateMetricError as exc:
        raise StepFailure("degenerate_metric", str(exc)) from exc
    except InvalidStateError as exc:
        raise StepFailure("blowup_detected", str(exc)) from exc
    if not np.all(np.isfinite(y_new)):
        raise StepFailure("blowup_detected", f"non-finite state after step at t={t + dt:.6g}")
    try:
        new = _unpack(state, y_new, t + dt, config.scheme)
    except InvalidStateError as exc:
        raise StepFailure("blowup_detected", str(exc)) from exc
    if isinstance(new, WarpedProductState):
        try:
            check_positive(new)
        except DegenerateMetricError as exc:
            raise StepFailure("degenerate_metric", str(exc)) from exc
    return new


def run(initial, params: FlowParams, config: IntegratorConfig, keep_snapshots=False) -> RunOutcome:
    """Integrate from ``initial`` to ``config.t_end``.

    A FlowRecord is emitted for the initial state, every ``record_every``
    steps, and the final state. Time-centred residuals of each record are
    filled in from the neighbouring steps once the following step exists; the
    first and last rows have none (NaN).

    Blow-up (max|R| above the cap, non-finite data) and degeneration are
    reported through ``status``; ``t_final`` is then the last finite time.
    """
    _check_dims(initial, params)
    if not params.allow_degenerate and not params.in_regime:
        raise RegimeError("parameters outside the parabolic regime")
    state = initial
    fields = curvature(state)
    pinch = diagnostics.PinchingContext.from_fields(fields) if params.dim >= 3 else None
    records = []
    snapshots = []
    status = "reached_t_end"
    message = ""
    steps = 0
    last_dt = 0.0

    def make_record(st, fl, dt_used):
        rec = diagnostics.make_record(st, fl, params, dt_used, pinch)
        records.append(rec)
        if keep_snapshots:
            snapshots.append(st)
        return rec

    make_record(state, fields, 0.0)
    pending = None  # (record, (state, fields) one step before it)
    t_end = config.t_end
    while True:
        remaining = t_end - state.t
        if remaining <= 1e-13 * max(1.0, t_end):
            break
        if steps >= config.max_steps:
            status = "max_steps"
            message = f"max_steps = {config.max_steps} reached at t = {state.t:.6g}"
            break
        bound = stable_dt(state, params, config)
        dt = bound if config.dt_max is None else min(bound, config.dt_max)
        dt = min(dt, remaining)
        try:
            new = step(state, params, config, dt=dt)
            new_fields = curvature(new)
        except StepFailure as exc:
            status, message = exc.status, str(exc)
            break
        except DegenerateMetricError as exc:
            status, message = "degenerate_metric", str(exc)
            break
        except InvalidStateError as exc:
            status, message = "blowup_detected", str(exc)
            break
        r_max = float(np.max(np.abs(new_fields.R)))
        if not math.isfinite(r_max) or r_max > config.blowup_R_cap:
            status = "blowup_detected"
            message = (
                f"max|R| = {r_max:.3e} exceeds cap {config.blowup_R_cap:.3e} at t = {new.t:.6g}"
            )
            break
        if pending is not None:
            rec, before = pending
            diagnostics.fill_centered(rec, before, (state, fields), (new, new_fields), params)
            pending = None
        prev = (state, fields)
        state, fields = new, new_fields
        steps += 1
        last_dt = dt
        if steps % config.record_every == 0:
            pending = (make_record(state, fields, dt), prev)
    if records[-1].t != state.t:
        make_record(state, fields, last_dt)
    return RunOutcome(
        status=status,
        t_final=state.t,
        records=records,
        final_state=state,
        params=params,
        message=message,
        pinching=pinch,
        snapshots=snapshots,
    )
