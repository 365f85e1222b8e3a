"""``ryflow`` command line.

Subcommands::

    ryflow simulate --config run.cfg --out-dir out/
    ryflow analyze-symbol --alpha 1 --beta 0 --n 3
    ryflow analyze-symbol --n 4 --sweep --alpha-range 0.1 2 20 --beta-range -1 1 41 --out map.csv
    ryflow verify torus-gaussbonnet
    ryflow exact product --alpha 1 --beta 0 --n 4 --t 0.1

Exit codes: 0 success, 2 blow-up or degeneration (expected for shrinking
data), 3 monitor or criterion failure (also a run cut short by max_steps),
4 invalid configuration or arguments.

Runs are always deterministic and single threaded, so ``--serial`` is
accepted for compatibility and changes nothing. The environment variable
RYFLOW_SEED is reserved for future stochastic features and currently unused.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from ryflow import __version__, diagnostics, oracles, symbol
from ryflow.config import ConfigError, RunConfig
from ryflow.errors import RegimeError, UnsupportedDimensionError
from ryflow.flow import run
from ryflow.output import SCHEMA_VERSION, dumps, fmt, write_csv, write_json
from ryflow.params import FlowParams

log = logging.getLogger("ryflow")

EXIT_OK = 0
EXIT_BLOWUP = 2
EXIT_MONITOR = 3
EXIT_INVALID = 4

SYMBOL_DIMS = range(2, 17)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse would exit with 2, which here means blow-up
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# simulate


def evaluate_monitors(cfg: RunConfig, outcome):
    recs = outcome.records
    scale = recs[0].h ** 2 + max(r.dt for r in recs)
    params = outcome.params
    reports = []
    for name in cfg.monitors:
        if name == "scalar_min":
            reports.append(
                diagnostics.scalar_min_monitor(recs, recs[0].R_min, params, cfg.c_disc * scale)
            )
        elif name == "volume_rate":
            conserve = cfg.conserve_tol if cfg.geometry == "conformal2d" else None
            reports.append(diagnostics.volume_rate_monitor(recs, cfg.c_vol * scale, conserve))
        elif name == "pinching":
            reports.append(diagnostics.pinching_record_monitor(recs, cfg.pinching_tol))
        elif name == "derivative_decay":
            reports.append(diagnostics.derivative_decay_record_monitor(recs))
    return reports


def exit_code_for(status, reports):
    if status in ("blowup_detected", "degenerate_metric"):
        return EXIT_BLOWUP
    if status != "reached_t_end" or not all(r.passed for r in reports):
        return EXIT_MONITOR
    return EXIT_OK


def run_summary(outcome):
    recs = outcome.records
    last = recs[-1]
    return {
        "steps_recorded": len(recs),
        "h": recs[0].h,
        "dt_max": max(r.dt for r in recs),
        "R_min_initial": recs[0].R_min,
        "R_min_final": last.R_min,
        "R_max_final": last.R_max,
        "volume_initial": recs[0].volume,
        "volume_final": last.volume,
        "volume_drift": diagnostics.volume_drift(recs),
        "sup_ric_hess": max(r.ric_hess_sup for r in recs),
        "max_res_R_evol": max((r.res_R_evol for r in recs if np.isfinite(r.res_R_evol)), default=None),
        "max_res_Ric_evol": max((r.res_Ric_evol for r in recs if np.isfinite(r.res_Ric_evol)), default=None),
        "pinching_shift_b": outcome.pinching.b if outcome.pinching else None,
    }


def cmd_simulate(args):
    cfg = RunConfig.load(args.config)
    if args.allow_degenerate:
        cfg.allow_degenerate = True
    params = cfg.flow_params()
    integ = cfg.integrator()
    state = cfg.initial_state()
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    outcome = run(state, params, integ)
    reports = evaluate_monitors(cfg, outcome)
    code = exit_code_for(outcome.status, reports)
    for rep in reports:
        if not rep.passed:
            log.warning("monitor %s failed at t=%s: %s", rep.name, rep.t_worst, rep.detail)
    if outcome.status != "reached_t_end":
        log.warning("%s: %s", outcome.status, outcome.message)

    if cfg.csv_path:
        write_csv(outcome.records, out_dir / cfg.csv_path)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "status": outcome.status,
        "t_final": outcome.t_final,
        "exit_code": code,
        "message": outcome.message,
        "monitors": [r.to_json() for r in reports],
        "all_monitors_passed": all(r.passed for r in reports),
        "config": cfg.as_dict(),
        "summary": run_summary(outcome),
    }
    if cfg.json_path:
        write_json(payload, out_dir / cfg.json_path)
    if cfg.svg:
        from ryflow.plotting import plot_records

        plot_records(outcome.records, out_dir, stem=Path(args.config).stem)
    print(f"status={outcome.status} t_final={fmt(outcome.t_final)} exit={code}")
    return code


# ---------------------------------------------------------------------------
# analyze-symbol


def _check_dim(n):
    if n not in SYMBOL_DIMS:
        raise UnsupportedDimensionError(f"n must be in 2..16, got {n}")


def symbol_report(alpha, beta, n):
    params = FlowParams(alpha, beta, n, allow_degenerate=True)
    m = symbol.build_symbol_matrix(params)
    verdict, lo = symbol.is_strongly_elliptic(params)
    return {
        "alpha": alpha,
        "beta": beta,
        "n": n,
        "eigenvalues": [{"value": v, "multiplicity": k} for v, k in symbol.symbol_spectrum(m)],
        "min_eigenvalue": lo,
        "verdict": verdict,
    }


def cmd_analyze_symbol(args):
    _check_dim(args.n)
    if args.sweep:
        alphas = np.linspace(*args.alpha_range[:2], int(args.alpha_range[2]))
        betas = np.linspace(*args.beta_range[:2], int(args.beta_range[2]))
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["alpha", "beta", "min_eigenvalue", "verdict"])
            for a in alphas:
                for b in betas:
                    verdict, lo = symbol.is_strongly_elliptic(FlowParams(a, b, args.n, allow_degenerate=True))
                    w.writerow([fmt(a), fmt(b), fmt(lo), verdict])
        print(f"wrote {len(alphas) * len(betas)} lattice points to {out}")
        return EXIT_OK
    if args.alpha is None or args.beta is None:
        raise UsageError("analyze-symbol needs --alpha and --beta (or --sweep)")
    rep = symbol_report(args.alpha, args.beta, args.n)
    if args.json:
        sys.stdout.write(dumps(rep))
    else:
        print(f"symbol of the gauge-fixed operator, n={args.n}, alpha={args.alpha}, beta={args.beta}")
        for e in rep["eigenvalues"]:
            print(f"  eigenvalue {fmt(e['value']):>24}  multiplicity {e['multiplicity']}")
        print(f"verdict: {rep['verdict']}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args):
    from ryflow import acceptance

    if args.scenario not in acceptance.SCENARIOS:
        raise UsageError(
            f"unknown scenario {args.scenario!r}; choose from {', '.join(acceptance.SCENARIOS)}"
        )
    results = acceptance.run_scenario(args.scenario)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "scenario": args.scenario,
        "passed": all(r.passed for r in results),
        "criteria": [r.to_json() for r in results],
    }
    sys.stdout.write(dumps(payload))
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_json(payload, out / f"verify_{args.scenario}.json")
    return EXIT_OK if payload["passed"] else EXIT_MONITOR


# ---------------------------------------------------------------------------
# exact


def cmd_exact(args):
    p = FlowParams(args.alpha, args.beta, args.n)
    if args.family == "einstein":
        fam = oracles.EinsteinFamily(args.lam, args.c0, args.n)
        out = {
            "scale": oracles.einstein_scale(fam, p, args.t),
            "scalar_curvature": oracles.einstein_scalar(fam, p, args.t),
            "extinction_time": oracles.einstein_extinction_time(fam, p),
            "blow_up_bound": oracles.blow_up_bound(fam.initial_scalar, p),
        }
    elif args.family == "product":
        sol = oracles.product_metric_solution(args.r0, args.phi0, p, args.t)
        out = {
            "phi": float(sol.phi),
            "psi": float(sol.psi),
            "extinct": bool(sol.extinct),
            "extinction_time": oracles.product_extinction_time(args.r0, p),
        }
    else:
        out = {
            "blow_up_bound": oracles.blow_up_bound(args.a, p),
            "comparison": oracles.scalar_min_comparison(args.a, p, args.t),
        }
    out.update(family=args.family, alpha=args.alpha, beta=args.beta, n=args.n, t=args.t)
    sys.stdout.write(dumps(out))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser():
    parser = _Parser(prog="ryflow", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--serial", action="store_true", help="deterministic mode (always on)")

    sim = sub.add_parser("simulate", parents=[common], help="run a flow from a config file")
    sim.add_argument("--config", required=True, help="key = value run configuration")
    sim.add_argument("--out-dir", default=".", help="directory for CSV/JSON/SVG output")
    sim.add_argument("--allow-degenerate", action="store_true",
                     help="permit parameters outside the parabolic regime")
    sim.set_defaults(func=cmd_simulate)

    sym = sub.add_parser("analyze-symbol", parents=[common], help="principal symbol spectrum")
    sym.add_argument("--alpha", type=float)
    sym.add_argument("--beta", type=float)
    sym.add_argument("--n", type=int, required=True, help="manifold dimension, 2..16")
    sym.add_argument("--json", action="store_true", help="print JSON instead of a table")
    sym.add_argument("--sweep", action="store_true", help="write a regime map over an (alpha, beta) lattice")
    sym.add_argument("--alpha-range", type=float, nargs=3, default=[0.1, 2.0, 20],
                     metavar=("LO", "HI", "COUNT"))
    sym.add_argument("--beta-range", type=float, nargs=3, default=[-1.0, 1.0, 41],
                     metavar=("LO", "HI", "COUNT"))
    sym.add_argument("--out", default="regime_map.csv", help="sweep CSV path")
    sym.set_defaults(func=cmd_analyze_symbol)

    ver = sub.add_parser("verify", parents=[common], help="run a built-in acceptance scenario")
    ver.add_argument("scenario", help="scenario name, or 'all'")
    ver.add_argument("--out-dir", help="also write the verdict JSON here")
    ver.set_defaults(func=cmd_verify)

    ex = sub.add_parser("exact", parents=[common], help="print closed-form oracle values")
    ex.add_argument("family", choices=("einstein", "product", "bound"))
    ex.add_argument("--alpha", type=float, default=1.0)
    ex.add_argument("--beta", type=float, default=0.0)
    ex.add_argument("--n", type=int, default=3)
    ex.add_argument("--t", type=float, default=0.0)
    ex.add_argument("--lam", type=float, default=1.0, help="Einstein constant")
    ex.add_argument("--c0", type=float, default=1.0, help="initial Einstein scale")
    ex.add_argument("--r0", type=float, default=1.0, help="initial sphere radius")
    ex.add_argument("--phi0", type=float, default=1.0, help="initial circle factor")
    ex.add_argument("--a", type=float, default=1.0, help="initial minimum of R")
    ex.set_defaults(func=cmd_exact)
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ConfigError, RegimeError, UnsupportedDimensionError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
