"""Run configuration: flat ``key = value`` text with dotted section names.

Example::

    # product metric on S^1 x S^3
    geometry = warped
    grid.n = 32
    flow.dim = 4
    flow.alpha = 1.0
    flow.beta = 0.0
    run.t_end = 1.0
    initial.kind = product
    initial.r0 = 1.0

Recognised keys and defaults are listed in ``KEYS``. Unknown keys are an
error so typos cannot silently fall back to defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ryflow.errors import RegimeError
from ryflow.flow import SCHEMES, IntegratorConfig
from ryflow.geometry import ConformalTorusState, WarpedProductState, grid_points
from ryflow.params import FlowParams

GEOMETRIES = ("conformal2d", "warped")
INITIAL_KINDS = ("flat", "cosine", "product", "file")
MONITORS = ("scalar_min", "volume_rate", "pinching", "derivative_decay")

# key -> (type, default); default None means optional/unset
KEYS = {
    "geometry": (str, None),
    "grid.n": (int, 32),
    "flow.dim": (int, None),
    "flow.alpha": (float, None),
    "flow.beta": (float, None),
    "flow.allow_degenerate": (bool, False),
    "run.t_end": (float, None),
    "run.cfl_safety": (float, 0.2),
    "run.record_every": (int, 1),
    "run.max_steps": (int, 1_000_000),
    "run.scheme": (str, "rk4"),
    "run.dt_max": (float, None),
    "run.blowup_R_cap": (float, 1e6),
    "initial.kind": (str, "flat"),
    "initial.amplitude": (float, 0.3),
    "initial.mode": (int, 1),
    "initial.r0": (float, 1.0),
    "initial.phi0": (float, 1.0),
    "initial.path": (str, None),
    "output.csv": (str, "records.csv"),
    "output.json": (str, "summary.json"),
    "output.svg": (bool, True),
    "monitors.enabled": (list, list(MONITORS)),
    "monitors.c_disc": (float, 1.0),
    "monitors.c_vol": (float, 1e-3),
    "monitors.conserve_tol": (float, 1e-12),
    "monitors.pinching_tol": (float, 1e-9),
}

REQUIRED = ("geometry", "flow.alpha", "flow.beta", "run.t_end")


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry when known."""

    def __init__(self, message, key=None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


def _convert(key, typ, raw):
    try:
        if typ is bool:
            low = raw.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if typ is list:
            return [x.strip() for x in raw.split(",") if x.strip()]
        return typ(raw)
    except ValueError:
        raise ConfigError(f"cannot parse {raw!r} as {typ.__name__}", key) from None


def parse_config_text(text) -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (x.strip() for x in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError("unknown key", key)
        if key in values:
            raise ConfigError("duplicate key", key)
        values[key] = _convert(key, KEYS[key][0], raw)
    return values


@dataclass
class RunConfig:
    geometry: str
    grid_n: int
    dim: int
    alpha: float
    beta: float
    t_end: float
    cfl_safety: float = 0.2
    record_every: int = 1
    max_steps: int = 1_000_000
    scheme: str = "rk4"
    dt_max: Optional[float] = None
    blowup_R_cap: float = 1e6
    initial: dict = field(default_factory=lambda: {"kind": "flat"})
    csv_path: Optional[str] = "records.csv"
    json_path: Optional[str] = "summary.json"
    svg: bool = True
    monitors: list = field(default_factory=lambda: list(MONITORS))
    c_disc: float = 1.0
    c_vol: float = 1e-3
    conserve_tol: float = 1e-12
    pinching_tol: float = 1e-9
    allow_degenerate: bool = False
    base_dir: Path = Path(".")

    @classmethod
    def from_mapping(cls, values: dict, base_dir=".") -> "RunConfig":
        for key in REQUIRED:
            if key not in values:
                raise ConfigError("required key missing", key)

        def get(key):
            return values.get(key, KEYS[key][1])

        geometry = get("geometry")
        if geometry not in GEOMETRIES:
            raise ConfigError(f"must be one of {GEOMETRIES}", "geometry")
        dim = get("flow.dim")
        if dim is None:
            dim = 2 if geometry == "conformal2d" else None
        if dim is None:
            raise ConfigError("required for warped geometry", "flow.dim")
        if geometry == "conformal2d" and dim != 2:
            raise ConfigError("conformal2d geometry requires dim = 2", "flow.dim")
        if geometry == "warped" and dim < 3:
            raise ConfigError("warped geometry requires dim >= 3", "flow.dim")
        kind = get("initial.kind")
        if kind not in INITIAL_KINDS:
            raise ConfigError(f"must be one of {INITIAL_KINDS}", "initial.kind")
        if geometry == "conformal2d" and kind == "product":
            raise ConfigError("product initial data needs the warped geometry", "initial.kind")
        if geometry == "warped" and kind == "flat":
            raise ConfigError("S^1 x S^(n-1) carries no flat warped metric", "initial.kind")
        if kind == "file" and not get("initial.path"):
            raise ConfigError("required when initial.kind = file", "initial.path")
        scheme = get("run.scheme")
        if scheme not in SCHEMES:
            raise ConfigError(f"must be one of {SCHEMES}", "run.scheme")
        monitors = get("monitors.enabled")
        for m in monitors:
            if m not in MONITORS:
                raise ConfigError(f"unknown monitor {m!r}", "monitors.enabled")
        n = get("grid.n")
        if n < 8 or n % 2:
            raise ConfigError("grid size must be even and >= 8", "grid.n")
        return cls(
            geometry=geometry,
            grid_n=n,
            dim=dim,
            alpha=get("flow.alpha"),
            beta=get("flow.beta"),
            t_end=get("run.t_end"),
            cfl_safety=get("run.cfl_safety"),
            record_every=get("run.record_every"),
            max_steps=get("run.max_steps"),
            scheme=scheme,
            dt_max=get("run.dt_max"),
            blowup_R_cap=get("run.blowup_R_cap"),
            initial={
                "kind": kind,
                "amplitude": get("initial.amplitude"),
                "mode": get("initial.mode"),
                "r0": get("initial.r0"),
                "phi0": get("initial.phi0"),
                "path": get("initial.path"),
            },
            csv_path=get("output.csv"),
            json_path=get("output.json"),
            svg=get("output.svg"),
            monitors=monitors,
            c_disc=get("monitors.c_disc"),
            c_vol=get("monitors.c_vol"),
            conserve_tol=get("monitors.conserve_tol"),
            pinching_tol=get("monitors.pinching_tol"),
            allow_degenerate=get("flow.allow_degenerate"),
            base_dir=Path(base_dir),
        )

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
        return cls.from_mapping(parse_config_text(text), base_dir=path.parent)

    def flow_params(self) -> FlowParams:
        try:
            return FlowParams(self.alpha, self.beta, self.dim, self.allow_degenerate)
        except RegimeError as exc:
            raise ConfigError(
                f"{exc} (set flow.allow_degenerate = true to run outside the regime)",
                "flow.beta" if self.alpha > 0 else "flow.alpha",
            ) from None

    def integrator(self) -> IntegratorConfig:
        try:
            return IntegratorConfig(
                t_end=self.t_end,
                cfl_safety=self.cfl_safety,
                max_steps=self.max_steps,
                blowup_R_cap=self.blowup_R_cap,
                record_every=self.record_every,
                scheme=self.scheme,
                dt_max=self.dt_max,
            )
        except ValueError as exc:
            raise ConfigError(str(exc), "run") from None

    def initial_state(self):
        ini = self.initial
        n = self.grid_n
        kind = ini["kind"]
        if self.geometry == "conformal2d":
            if kind == "flat":
                return ConformalTorusState.flat(n)
            if kind == "cosine":
                return ConformalTorusState.cosine(n, ini["amplitude"], ini["mode"])
            u = self._load_array(ini["path"])
            if u.shape != (n, n):
                raise ConfigError(f"file grid has shape {u.shape}, expected {(n, n)}", "initial.path")
            return ConformalTorusState(u)
        if kind == "product":
            return WarpedProductState.product(n, self.dim, ini["r0"], ini["phi0"])
        if kind == "cosine":
            s = grid_points(n)
            psi = ini["r0"] + ini["amplitude"] * np.cos(ini["mode"] * s)
            return WarpedProductState(np.full(n, ini["phi0"]), psi, self.dim)
        arr = self._load_array(ini["path"])
        if arr.shape != (n, 2):
            raise ConfigError(f"file must hold {n} rows of 'phi psi', got shape {arr.shape}", "initial.path")
        return WarpedProductState(arr[:, 0], arr[:, 1], self.dim)

    def _load_array(self, path):
        p = Path(path)
        if not p.is_absolute():
            p = self.base_dir / p
        try:
            return np.loadtxt(p, ndmin=2)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot load initial data: {exc}", "initial.path") from None

    def as_dict(self):
        return {
            "geometry": self.geometry,
            "grid_n": self.grid_n,
            "dim": self.dim,
            "alpha": self.alpha,
            "beta": self.beta,
            "t_end": self.t_end,
            "cfl_safety": self.cfl_safety,
            "record_every": self.record_every,
            "scheme": self.scheme,
            "dt_max": self.dt_max,
            "initial": {k: v for k, v in self.initial.items() if v is not None},
            "monitors": list(self.monitors),
            "allow_degenerate": self.allow_degenerate,
        }
