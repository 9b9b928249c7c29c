"""Experiment driver.

Subcommands:

  run        one instance (named scenario or TOML config), write trace + summary
  reproduce  run a named scenario with all of its registered rules
  sweep      run a list of configs from one TOML file, merge summaries
  lds-check  sampled sharpness certification for a catalog set
  rate-fit   slope / h-decay report for an existing trace CSV

Exit codes: 0 success, 1 configuration error, 2 a runtime invariant check
failed, 3 the floating-point computation broke (non-finite values) or an
iterative routine exhausted its budget.  Output root is `--out` when given,
else the FWLAB_OUT environment variable, else the working directory.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import analysis, geometry, objectives, solver, traceio
from .errors import ConfigError, ConvergenceFailure, InvariantViolation, NumericFailure
from .scenarios import REGISTRY, get_scenario, make_rule
from .stepping import LineSearch, OpenLoop, ShortStep

TRAJECTORY_POINTS = 1024


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as ConfigError (exit code 1)."""

    def error(self, message):
        raise ConfigError(message)


def _out_dir(args) -> str:
    out = args.out or os.environ.get("FWLAB_OUT") or "."
    return traceio.ensure_out_dir(out)


# --- config -> instances ---------------------------------------------------

def build_set(spec: dict) -> geometry.FeasibleSet:
    spec = dict(spec)
    kind = spec.pop("kind", None)
    table = {
        "l2ball": geometry.L2Ball,
        "lpball": geometry.LpBall,
        "simplex": geometry.Simplex,
        "box": geometry.Box,
        "ellipsoid": geometry.Ellipsoid,
        "polytope": geometry.VertexPolytope,
        "capsule": geometry.Capsule,
        "stadium": geometry.Stadium,
        "truncated-disk": geometry.TruncatedDisk,
        "superflat": geometry.superflat_body,
    }
    if kind not in table:
        raise ConfigError(f"unknown set kind {kind!r}; known: {sorted(table)}")
    try:
        return table[kind](**spec)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad [set] config for kind {kind!r}: {e}") from e


def _build_ground_truth(spec: dict) -> objectives.GroundTruth | None:
    if "f_star" not in spec and "minimizers" not in spec:
        return None
    if "f_star" not in spec:
        raise ConfigError("[objective] has minimizers but no f_star")
    heb = None
    if "heb" in spec:
        h = spec["heb"]
        heb = objectives.HebCertificate(B=h["B"], r=h["r"], rho=h["rho"])
    return objectives.GroundTruth(
        f_star=spec["f_star"],
        minimizers=spec.get("minimizers"),
        heb=heb,
    )


def build_objective(spec: dict) -> objectives.Objective:
    spec = dict(spec)
    kind = spec.pop("kind", None)
    try:
        truth = _build_ground_truth(spec)
        for k in ("f_star", "minimizers", "heb"):
            spec.pop(k, None)
        if kind == "quadratic":
            return objectives.Quadratic(spec["Q"], spec["c"], ground_truth=truth)
        if kind == "linear":
            return objectives.Linear(spec["c"], L=spec.get("L", 1.0),
                                     ground_truth=truth)
        if kind == "distance-power":
            return objectives.DistancePower(
                anchor=spec["anchor"], r=spec.get("r", 2.0),
                radius_bound=spec.get("radius_bound"), L=spec.get("L"),
                anchor_feasible=spec.get("anchor_feasible", True))
        if kind == "stadium-psi":
            return objectives.StadiumPsi(c=spec.get("c", 2.0), ground_truth=truth)
    except (TypeError, ValueError, KeyError) as e:
        raise ConfigError(f"bad [objective] config for kind {kind!r}: {e}") from e
    raise ConfigError(f"unknown objective kind {kind!r}")


def build_rule(spec, L: float):
    if isinstance(spec, str):
        try:
            return make_rule(spec, L)
        except ValueError as e:
            raise ConfigError(str(e)) from e
    spec = dict(spec)
    kind = spec.pop("kind", None)
    try:
        if kind == "ss":
            return ShortStep(L=spec.get("L", L))
        if kind == "ls":
            return LineSearch(**spec)
        if kind == "ol":
            return OpenLoop(ell=spec.get("ell", 2))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad [rule] config for kind {kind!r}: {e}") from e
    raise ConfigError(f"unknown rule kind {kind!r}")


def _load_toml(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"invalid TOML in {path}: {e}") from e


def _runs_from_config(cfg: dict, args) -> list[dict]:
    """Normalize a config document into a list of single-run specs."""
    if "scenario" in cfg:
        scenario = get_scenario_or_config_error(cfg["scenario"])
        built = scenario.build()
        labels = cfg.get("rules") or ([cfg["rule"]] if "rule" in cfg else
                                      list(scenario.rule_labels))
        runs = []
        for label in labels:
            if isinstance(label, str) and label in built["rules"]:
                rule = built["rules"][label]
            else:
                rule = build_rule(label, built["objective"].L)
            runs.append({
                "name": f"{scenario.name}__{_rule_slug(label)}",
                "set": built["set"], "objective": built["objective"],
                "rule": rule, "x0": built["x0"],
                "t_max": int(cfg.get("t_max", built["t_max"])),
            })
    else:
        for key in ("set", "objective", "rule", "x0"):
            if key not in cfg:
                raise ConfigError(f"config needs {key!r} (or a 'scenario' name)")
        objective = build_objective(cfg["objective"])
        runs = [{
            "name": str(cfg.get("name", "custom")),
            "set": build_set(cfg["set"]),
            "objective": objective,
            "rule": build_rule(cfg["rule"], objective.L),
            "x0": np.asarray(cfg["x0"], dtype=float),
            "t_max": int(cfg.get("t_max", 10_000)),
        }]
    for run in runs:
        run["gap_tol"] = cfg.get("gap_tol")
        run["full_resolution"] = bool(cfg.get("full_resolution", False))
        run["window"] = cfg.get("analysis", {}).get("window")
    _apply_overrides(runs, args)
    return runs


def _rule_slug(label) -> str:
    return label if isinstance(label, str) else str(label.get("kind", "rule"))


def _apply_overrides(runs: list[dict], args) -> None:
    for run in runs:
        if getattr(args, "t_max", None) is not None:
            run["t_max"] = args.t_max
        if getattr(args, "gap_tol", None) is not None:
            run["gap_tol"] = args.gap_tol
        if getattr(args, "full_resolution", False):
            run["full_resolution"] = True


def get_scenario_or_config_error(name: str):
    try:
        return get_scenario(name)
    except KeyError as e:
        raise ConfigError(str(e)) from e


# --- run execution ---------------------------------------------------------

def _trajectory(trace) -> list | None:
    if trace.records and trace.records[0].x.shape[0] == 2:
        records = trace.records
        stride = max(1, len(records) // TRAJECTORY_POINTS)
        picked = records[::stride]
        if picked[-1].t != records[-1].t:
            picked.append(records[-1])
        return [[r.t, float(r.x[0]), float(r.x[1])] for r in picked]
    return None


def execute_run(run: dict, out_dir: str) -> dict:
    try:
        trace = solver.run(run["set"], run["objective"], run["rule"], run["x0"],
                           t_max=run["t_max"], gap_tol=run.get("gap_tol"),
                           full_resolution=run.get("full_resolution", False))
    except ValueError as e:
        raise ConfigError(str(e)) from e
    trace_path = os.path.join(out_dir, f"{run['name']}.csv")
    traceio.write_trace_csv(trace, trace_path)

    summary = dict(trace.meta)
    final = trace.final()
    summary["name"] = run["name"]
    summary["trace_csv"] = os.path.basename(trace_path)
    summary["final"] = {"t": final.t, "F": final.F, "g": final.g,
                        "d": final.d, "gamma": final.gamma,
                        "delta": final.delta, "h": final.h}
    summary["n_records"] = len(trace)
    traj = _trajectory(trace)
    if traj is not None:
        summary["trajectory"] = traj
        summary["x0"] = [float(v) for v in run["x0"]]
    try:
        fit = analysis.fit_exponent(trace, window=run.get("window"))
        summary["fit"] = {"slope": fit.slope, "intercept": fit.intercept,
                          "window": list(fit.window), "residual": fit.residual,
                          "n_points": fit.n_points,
                          "converged_at": fit.converged_at}
    except ValueError:
        summary["fit"] = None
    try:
        summary["h_decay"] = analysis.check_h_decay(trace)
    except ValueError:
        summary["h_decay"] = None
    summary_path = os.path.join(out_dir, f"{run['name']}.summary.json")
    traceio.write_summary_json(summary, summary_path)
    print(f"wrote {trace_path}")
    print(f"wrote {summary_path}")
    return summary


def cmd_run(args) -> int:
    out_dir = _out_dir(args)
    if args.config:
        cfg = _load_toml(args.config)
    elif args.scenario:
        cfg = {"scenario": args.scenario}
        if args.rule:
            cfg["rules"] = list(args.rule)
    else:
        raise ConfigError("run needs --scenario or --config")
    for run in _runs_from_config(cfg, args):
        execute_run(run, out_dir)
    return 0


def cmd_reproduce(args) -> int:
    out_dir = _out_dir(args)
    cfg = {"scenario": args.scenario}
    for run in _runs_from_config(cfg, args):
        execute_run(run, out_dir)
    return 0


def _sweep_worker(payload: tuple) -> dict:
    cfg, out_dir = payload
    runs = _runs_from_config(cfg, argparse.Namespace())
    return {run["name"]: execute_run(run, out_dir) for run in runs}


def cmd_sweep(args) -> int:
    out_dir = _out_dir(args)
    doc = _load_toml(args.config)
    entries = doc.get("runs")
    if not isinstance(entries, list) or not entries:
        raise ConfigError("sweep config needs a nonempty [[runs]] array")
    payloads = [({**doc.get("defaults", {}), **entry}, out_dir)
                for entry in entries]
    merged: dict[str, dict] = {}
    if args.workers > 1:
        with concurrent.futures.ProcessPoolExecutor(args.workers) as pool:
            for part in pool.map(_sweep_worker, payloads):
                merged.update(part)
    else:
        for payload in payloads:
            merged.update(_sweep_worker(payload))
    index_path = os.path.join(out_dir, "sweep.summary.json")
    traceio.write_summary_json({k: merged[k] for k in sorted(merged)}, index_path)
    print(f"wrote {index_path}")
    return 0


# --- certification and fitting ---------------------------------------------

_LDS_SETS = {
    "l2ball": lambda: geometry.L2Ball(np.zeros(2), 1.0),
    "lp4-ball": lambda: geometry.LpBall(np.zeros(2), 1.0, p=4.0),
    "stadium": lambda: geometry.Stadium(1.0),
    "truncated-disk": lambda: geometry.TruncatedDisk(0.5),
    "superflat": lambda: geometry.superflat_body(1.0),
    "simplex": lambda: geometry.Simplex(3),
    "box": lambda: geometry.Box(np.zeros(2), np.ones(2)),
}

# Reference point each kind certifies around: the sharp curved-patch point
# for the curved sets, a vertex/face point for the flat negative cases.
_LDS_M = {
    "l2ball": (0.0, -1.0),
    "lp4-ball": (0.0, -1.0),
    "stadium": (2.0, 0.0),
    "truncated-disk": (-1.0, 0.0),
    "superflat": (0.0, 0.0),
    "simplex": (1.0, 0.0, 0.0),
    "box": (0.0, 0.0),
}


def _parse_point(text: str, kind: str):
    if text == "cap-point":
        return np.asarray(_LDS_M[kind], dtype=float)
    try:
        return np.asarray([float(v) for v in text.split(",")], dtype=float)
    except ValueError as e:
        raise ConfigError(f"--M must be 'cap-point' or comma floats: {e}") from e


def cmd_lds_check(args) -> int:
    if args.set not in _LDS_SETS:
        raise ConfigError(f"unknown --set {args.set!r}; known: {sorted(_LDS_SETS)}")
    set_ = _LDS_SETS[args.set]()
    M = _parse_point(args.M, args.set)
    report: dict = {"set": set_.descriptor(), "M": M, "q": args.q}

    rhos = ([float(v) for v in args.rho_sweep.split(",")] if args.rho_sweep
            else [args.rho])
    estimates = []
    for rho in rhos:
        try:
            est = analysis.estimate_lds(set_, M, q=args.q, rho=rho,
                                        n_x=args.n_x, n_g=args.n_g,
                                        seed=args.seed)
        except ValueError as e:
            raise ConfigError(str(e)) from e
        estimates.append({"rho": rho, "A_hat": est.A_hat,
                          "n_x": est.n_x, "n_g": est.n_g,
                          "seed": est.seed, "witness": est.witness})
    report["estimates"] = estimates

    if args.uc_bruteforce:
        alpha = analysis.estimate_uc_alpha(set_, q=args.q, seed=args.seed)
        report["uc_alpha_hat"] = alpha
        if alpha > 0:
            cert = analysis.lds_from_uc(geometry.UcParams(alpha, args.q))
            report["certificate"] = cert.descriptor()
        else:
            report["certificate"] = None

    _emit_report(report, args.json)
    return 0


def cmd_rate_fit(args) -> int:
    try:
        frame = traceio.read_trace_csv(args.trace)
    except (OSError, ValueError) as e:
        raise ConfigError(str(e)) from e
    window = tuple(args.window) if args.window else None
    report: dict = {"trace": args.trace, "n_records": len(frame)}
    try:
        fit = analysis.fit_exponent(frame, window=window)
        report["fit"] = {"slope": fit.slope, "intercept": fit.intercept,
                         "window": list(fit.window), "residual": fit.residual,
                         "n_points": fit.n_points,
                         "converged_at": fit.converged_at}
    except ValueError as e:
        raise ConfigError(f"cannot fit {args.trace}: {e}") from e
    try:
        report["h_decay"] = analysis.check_h_decay(frame, ell=args.ell)
    except ValueError:
        report["h_decay"] = None
    _emit_report(report, args.json)
    return 0


def _emit_report(report: dict, json_path: str | None) -> None:
    text = json.dumps(traceio._jsonable(report), indent=2, sort_keys=True)
    print(text)
    if json_path:
        with open(json_path, "w") as fh:
            fh.write(text + "\n")
        print(f"wrote {json_path}", file=sys.stderr)


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fwlab", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    names = ", ".join(sorted(REGISTRY))

    p_run = sub.add_parser("run", help="run one scenario or config")
    p_run.add_argument("--scenario", help=f"named scenario ({names})")
    p_run.add_argument("--rule", action="append",
                       help="rule label, repeatable (default: scenario's rules)")
    p_run.add_argument("--config", help="TOML config file")
    p_run.add_argument("--t-max", type=int, dest="t_max")
    p_run.add_argument("--gap-tol", type=float, dest="gap_tol")
    p_run.add_argument("--full-resolution", action="store_true")
    p_run.add_argument("--out", help="output directory (default: $FWLAB_OUT or .)")
    p_run.set_defaults(func=cmd_run)

    p_rep = sub.add_parser("reproduce", help="run a named scenario end to end")
    p_rep.add_argument("scenario", help=names)
    p_rep.add_argument("--t-max", type=int, dest="t_max")
    p_rep.add_argument("--out")
    p_rep.set_defaults(func=cmd_reproduce, gap_tol=None, full_resolution=False)

    p_sweep = sub.add_parser("sweep", help="run a [[runs]] list from TOML")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.add_argument("--out")
    p_sweep.set_defaults(func=cmd_sweep)

    p_lds = sub.add_parser("lds-check", help="sampled sharpness certification")
    p_lds.add_argument("--set", required=True)
    p_lds.add_argument("--M", default="cap-point",
                       help="'cap-point' or comma-separated coordinates")
    p_lds.add_argument("--q", type=float, default=2.0)
    p_lds.add_argument("--rho", type=float, default=0.3)
    p_lds.add_argument("--rho-sweep", dest="rho_sweep",
                       help="comma list of rho values, e.g. 0.3,0.1,0.03")
    p_lds.add_argument("--n-x", type=int, default=1000, dest="n_x")
    p_lds.add_argument("--n-g", type=int, default=1000, dest="n_g")
    p_lds.add_argument("--seed", type=int, default=0)
    p_lds.add_argument("--uc-bruteforce", action="store_true", dest="uc_bruteforce")
    p_lds.add_argument("--json", help="also write the report to this path")
    p_lds.set_defaults(func=cmd_lds_check)

    p_fit = sub.add_parser("rate-fit", help="slope and h-decay of a trace CSV")
    p_fit.add_argument("trace")
    p_fit.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"))
    p_fit.add_argument("--ell", type=int, default=None)
    p_fit.add_argument("--json")
    p_fit.set_defaults(func=cmd_rate_fit)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as e:
        print(f"fwlab: config error: {e}", file=sys.stderr)
        return 1
    except InvariantViolation as e:
        print(f"fwlab: invariant violation: {e}", file=sys.stderr)
        return 2
    except (NumericFailure, ConvergenceFailure) as e:
        print(f"fwlab: numeric failure: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
