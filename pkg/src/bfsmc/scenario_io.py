"""Scenario files, CSV traces, and the command-line interface.

Scenario files are TOML with sections [pair], [controller], [disturbance],
[sim], and optional [output]; parsing is strict (unknown sections or keys are
fatal) so parameter typos cannot silently change an experiment.  Traces are
CSV with a fixed column order and a trailing '#' comment block carrying the
events and the metadata needed to re-analyze the file exactly.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .errors import BfsmcError, ScenarioError
from .feedback import build_hong_pair, default_gains, tune_gains, validate_pair
from .hom_core import make_params
from .plant import builtin_disturbance
from .sim import AnalysisReport, Event, Scenario, Trajectory, analyze, run, run_batch

_FLOAT_FMT = "%.17g"


# ---------------------------------------------------------------------------
# scenario parsing

_PAIR_KEYS = {"r", "p", "kappa", "gains"}
_CTRL_KEYS = {"kind", "mu0", "lambda", "epsilon", "l0", "slope", "exp_rate"}
_SIM_KEYS = {"z0", "h", "horizon", "seed"}
_OUT_KEYS = {"csv", "decimation"}


def _need(table: dict, section: str, key: str):
    if key not in table:
        raise ScenarioError("missing required key", section, key)
    return table[key]


def _as_float(val, section, key) -> float:
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ScenarioError(f"expected a number, got {val!r}", section, key)
    return float(val)


def _check_keys(table: dict, allowed: set, section: str):
    unknown = set(table) - allowed
    if unknown:
        raise ScenarioError(f"unknown key(s): {sorted(unknown)}", section)


def parse_scenario(path) -> Scenario:
    """Parse and fully validate one scenario file (strict mode)."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError:
        raise ScenarioError(f"scenario file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"TOML parse error in {path}: {exc}")

    known_sections = {"pair", "controller", "disturbance", "sim", "output"}
    unknown = set(doc) - known_sections
    if unknown:
        raise ScenarioError(f"unknown section(s): {sorted(unknown)}")
    for required in ("pair", "controller", "disturbance", "sim"):
        if required not in doc:
            raise ScenarioError(f"missing section [{required}]")

    pair = doc["pair"]
    _check_keys(pair, _PAIR_KEYS, "pair")
    r = _need(pair, "pair", "r")
    if isinstance(r, bool) or not isinstance(r, int) or r < 1:
        raise ScenarioError(f"r must be an integer >= 1, got {r!r}", "pair", "r")
    p = _as_float(_need(pair, "pair", "p"), "pair", "p")
    kappa = _as_float(_need(pair, "pair", "kappa"), "pair", "kappa")
    make_params(r, p, kappa)  # raises with the violated invariant
    gains = _need(pair, "pair", "gains")
    if isinstance(gains, str):
        if gains != "tune":
            raise ScenarioError(f"gains must be a list or 'tune', got {gains!r}",
                                "pair", "gains")
    else:
        if not isinstance(gains, list) or len(gains) != r:
            raise ScenarioError(f"gains must be a list of {r} numbers", "pair", "gains")
        gains = tuple(_as_float(g, "pair", "gains") for g in gains)
        if any(g <= 0.0 for g in gains):
            raise ScenarioError("gains must be positive", "pair", "gains")

    ctrl = doc["controller"]
    _check_keys(ctrl, _CTRL_KEYS, "controller")
    kind = _need(ctrl, "controller", "kind")
    if kind not in ("case1", "host", "pure_chain", "open_loop"):
        raise ScenarioError(f"unknown controller kind {kind!r}", "controller", "kind")
    mu0 = lam = epsilon = None
    l0, slope, exp_rate = 1.0, 1.0, 0.0
    if kind == "case1":
        mu0 = _as_float(_need(ctrl, "controller", "mu0"), "controller", "mu0")
        lam = _as_float(_need(ctrl, "controller", "lambda"), "controller", "lambda")
        if mu0 <= 0.0:
            raise ScenarioError("mu0 must be positive", "controller", "mu0")
        if lam < 0.0:
            raise ScenarioError("lambda must be non-negative", "controller", "lambda")
        if "epsilon" in ctrl:
            raise ScenarioError("epsilon is a host parameter", "controller", "epsilon")
    elif kind == "host":
        epsilon = _as_float(_need(ctrl, "controller", "epsilon"), "controller", "epsilon")
        if epsilon <= 0.0:
            raise ScenarioError("epsilon must be positive", "controller", "epsilon")
        for bad in ("mu0", "lambda"):
            if bad in ctrl:
                raise ScenarioError(f"{bad} is a case1 parameter", "controller", bad)
    else:
        extra = set(ctrl) - {"kind"}
        if extra:
            raise ScenarioError(f"{kind} takes no parameters, got {sorted(extra)}",
                                "controller")
    if kind in ("case1", "host"):
        l0 = _as_float(ctrl.get("l0", 1.0), "controller", "l0")
        slope = _as_float(ctrl.get("slope", 1.0), "controller", "slope")
        exp_rate = _as_float(ctrl.get("exp_rate", 0.0), "controller", "exp_rate")
        if l0 < 1.0:
            raise ScenarioError("l0 must be >= 1", "controller", "l0")
        if slope < 0.0 or exp_rate < 0.0:
            raise ScenarioError("slope and exp_rate must be non-negative", "controller")

    simsec = doc["sim"]
    _check_keys(simsec, _SIM_KEYS, "sim")
    z0 = _need(simsec, "sim", "z0")
    if not isinstance(z0, list) or len(z0) != r:
        raise ScenarioError(f"z0 must be a list of {r} numbers", "sim", "z0")
    z0 = tuple(_as_float(x, "sim", "z0") for x in z0)
    h = _as_float(_need(simsec, "sim", "h"), "sim", "h")
    horizon = _as_float(_need(simsec, "sim", "horizon"), "sim", "horizon")
    if h <= 0.0:
        raise ScenarioError("h must be positive", "sim", "h")
    if horizon <= h:
        raise ScenarioError("horizon must exceed h", "sim", "horizon")
    seed = simsec.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ScenarioError(f"seed must be an integer, got {seed!r}", "sim", "seed")

    dist = dict(doc["disturbance"])
    did = dist.pop("id", None)
    if did is None:
        raise ScenarioError("missing required key", "disturbance", "id")
    if did == "tabulated" and "path" in dist:
        table_path = Path(dist.pop("path"))
        if not table_path.is_absolute():
            table_path = path.parent / table_path
        cols = _load_table(table_path)
        dist.update(cols)
    disturbance = builtin_disturbance(did, probe_horizon=horizon, **dist)

    out = doc.get("output", {})
    _check_keys(out, _OUT_KEYS, "output")
    csv_path = out.get("csv")
    decimation = out.get("decimation", 1)
    if isinstance(decimation, bool) or not isinstance(decimation, int) or decimation < 1:
        raise ScenarioError("decimation must be an integer >= 1", "output", "decimation")

    return Scenario(r=r, p=p, kappa=kappa, gains=gains, controller=kind,
                    disturbance=disturbance, z0=z0, h=h, horizon=horizon,
                    seed=seed, mu0=mu0, lam=lam, epsilon=epsilon, l0=l0,
                    slope=slope, exp_rate=exp_rate, output_csv=csv_path,
                    decimation=decimation, name=path.stem)


def _load_table(path: Path) -> dict:
    if not path.exists():
        raise ScenarioError(f"table file not found: {path}", "disturbance", "path")
    with open(path, newline="") as fh:
        reader = csv.reader(row for row in fh if not row.startswith("#"))
        header = next(reader)
        rows = [[float(x) for x in row] for row in reader if row]
    cols = {name: [row[i] for row in rows] for i, name in enumerate(header)}
    if not {"t", "phi", "gamma"} <= set(cols):
        raise ScenarioError("table needs columns t, phi, gamma", "disturbance", "path")
    return cols


# ---------------------------------------------------------------------------
# CSV emission and ingestion

def _fmt(x: float) -> str:
    return _FLOAT_FMT % x


def trajectory_columns(traj: Trajectory) -> list:
    cols = ["t"] + [f"z_{i + 1}" for i in range(traj.r)] + ["V", "bound", "phase"]
    cols += list(traj.gains.keys()) + ["u", "phi", "gamma"]
    return cols


def write_csv(traj: Trajectory, path, decimation: int = 1) -> None:
    """Trace rows (decimated) plus a trailing '#' block of events and meta."""
    if traj.t.size == 0:
        raise ScenarioError("refusing to write an empty trajectory")
    if decimation < 1:
        raise ScenarioError("decimation must be >= 1")
    cols = trajectory_columns(traj)
    idx = np.arange(0, traj.t.size, decimation)
    phase_names = np.where(traj.phase == 0, "searching", "barrier")
    with open(path, "w", newline="") as fh:
        fh.write(",".join(cols) + "\n")
        gain_arrays = list(traj.gains.values())
        for i in idx:
            row = [_fmt(traj.t[i])]
            row += [_fmt(traj.z[i, j]) for j in range(traj.r)]
            row += [_fmt(traj.V[i]), _fmt(traj.bound[i]), phase_names[i]]
            row += [_fmt(arr[i]) for arr in gain_arrays]
            row += [_fmt(traj.u[i]), _fmt(traj.phi[i]), _fmt(traj.gamma[i])]
            fh.write(",".join(row) + "\n")
        for e in traj.events:
            extras = "".join(f" {k}={_fmt(v)}" for k, v in sorted(e.info.items()))
            fh.write(f"# event {e.kind} t={_fmt(e.time)}{extras}\n")
        meta = dict(traj.meta)
        meta["decimation"] = int(decimation)
        fh.write("# meta " + json.dumps(meta, sort_keys=True) + "\n")


def read_trajectory(path) -> Trajectory:
    """Rebuild a Trajectory (columns, events, meta) from a written CSV."""
    header = None
    rows = []
    events = []
    meta = None
    with open(path, newline="") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("# meta "):
                meta = json.loads(line[len("# meta "):])
            elif line.startswith("# event "):
                parts = line[len("# event "):].split()
                kind = parts[0]
                kv = dict(p.split("=", 1) for p in parts[1:])
                time = float(kv.pop("t"))
                events.append(Event(kind, time, {k: float(v) for k, v in kv.items()}))
            elif line.startswith("#"):
                continue
            elif header is None:
                header = line.split(",")
            else:
                rows.append(line.split(","))
    if header is None or not rows:
        raise ScenarioError(f"no trace rows in {path}")
    if meta is None:
        raise ScenarioError(f"missing meta block in {path}")
    col = {name: i for i, name in enumerate(header)}
    r = sum(1 for name in header if name.startswith("z_"))
    n = len(rows)
    t = np.array([float(row[col["t"]]) for row in rows])
    z = np.array([[float(row[col[f"z_{j + 1}"]]) for j in range(r)] for row in rows])
    V = np.array([float(row[col["V"]]) for row in rows])
    bound = np.array([float(row[col["bound"]]) for row in rows])
    phase = np.array([0 if row[col["phase"]] == "searching" else 1 for row in rows],
                     dtype=np.int8)
    u = np.array([float(row[col["u"]]) for row in rows])
    phi = np.array([float(row[col["phi"]]) for row in rows])
    gamma = np.array([float(row[col["gamma"]]) for row in rows])
    gain_names = [name for name in header
                  if name in ("L", "L1", "L2", "xi")]
    gains = {name: np.array([float(row[col[name]]) for row in rows])
             for name in gain_names}
    assert n == t.size
    return Trajectory(t=t, z=z, V=V, bound=bound, phase=phase, u=u, phi=phi,
                      gamma=gamma, gains=gains, events=events, meta=meta)


# ---------------------------------------------------------------------------
# CLI

def _bundled_scenario(name: str):
    from importlib.resources import files
    cand = files("bfsmc").joinpath("scenarios", f"{name}.toml")
    return cand if cand.is_file() else None


def _resolve_scenario(arg: str) -> Path:
    p = Path(arg)
    if p.exists():
        return p
    if not arg.endswith(".toml"):
        bundled = _bundled_scenario(arg)
        if bundled is not None:
            return Path(str(bundled))
    raise ScenarioError(f"scenario not found: {arg!r} (no such file or bundled name)")


def _apply_overrides(scenario: Scenario, args) -> Scenario:
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.h is not None:
        updates["h"] = args.h
    if args.horizon is not None:
        updates["horizon"] = args.horizon
    if updates:
        scenario = dataclasses.replace(scenario, **updates)
    return scenario


def _strict_gate(report: AnalysisReport) -> bool:
    if report.n_escapes or report.n_blowups:
        return False
    if report.containment_pass is False:
        return False
    return True


def _cmd_run(args) -> int:
    scenario = _apply_overrides(parse_scenario(_resolve_scenario(args.scenario)), args)
    traj = run(scenario)
    out = args.out or scenario.output_csv or f"{scenario.name}.csv"
    decimation = args.decimate or scenario.decimation
    write_csv(traj, out, decimation)
    report = analyze(traj)
    print(f"wrote {out} ({traj.t.size} grid rows, decimation {decimation})")
    print(report.to_text())
    if args.strict and not _strict_gate(report):
        print("strict mode: containment failed", file=sys.stderr)
        return 3
    return 0


def _cmd_validate_pair(args) -> int:
    params = make_params(args.r, args.p, args.kappa)
    if args.tune:
        gains = tune_gains(params, seed=args.seed)
        print(f"tuned gains: {', '.join(_fmt(g) for g in gains)}")
    elif args.gains is not None:
        gains = tuple(float(x) for x in args.gains.split(","))
    else:
        gains = default_gains(args.r)
        print(f"default gains: {', '.join(_fmt(g) for g in gains)}")
    pair = build_hong_pair(params, gains, validate=False)
    report = validate_pair(pair, n_samples=args.samples, seed=args.seed)
    print(report.to_text())
    return 0 if report.passed else 1


def _set_param(scenario: Scenario, dotted: str, value: float) -> Scenario:
    section, _, key = dotted.partition(".")
    field_map = {
        ("controller", "mu0"): "mu0",
        ("controller", "lambda"): "lam",
        ("controller", "epsilon"): "epsilon",
        ("controller", "l0"): "l0",
        ("controller", "slope"): "slope",
        ("controller", "exp_rate"): "exp_rate",
        ("sim", "h"): "h",
        ("sim", "horizon"): "horizon",
        ("sim", "seed"): "seed",
    }
    field = field_map.get((section, key))
    if field is None:
        raise ScenarioError(f"unsupported sweep parameter {dotted!r}")
    if field == "seed":
        value = int(value)
    return dataclasses.replace(scenario, **{field: value})


def _cmd_sweep(args) -> int:
    base = _apply_overrides(parse_scenario(_resolve_scenario(args.scenario)), args)
    values = [float(v) for v in args.values.split(",")]
    cells = [_set_param(base, args.param, v) for v in values]
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    trajs = run_batch(cells, max_workers=args.jobs)
    ok = True
    print(f"{'value':>14s} {'t_bar':>12s} {'contained':>10s} {'escapes':>8s} {'max gain':>12s}")
    for v, traj in zip(values, trajs):
        report = analyze(traj)
        out = outdir / f"{base.name}__{args.param.replace('.', '_')}={v:g}.csv"
        write_csv(traj, out, args.decimate or base.decimation)
        tb = f"{report.t_bar:.6g}" if report.t_bar is not None else "-"
        contained = {True: "yes", False: "NO", None: "-"}[report.containment_pass]
        sup = max(report.gain_sup.values()) if report.gain_sup else float("nan")
        print(f"{v:>14g} {tb:>12s} {contained:>10s} {report.n_escapes:>8d} {sup:>12.6g}")
        ok = ok and _strict_gate(report)
    if args.strict and not ok:
        print("strict mode: at least one sweep cell failed containment", file=sys.stderr)
        return 3
    return 0


def _cmd_report(args) -> int:
    traj = read_trajectory(args.csv)
    print(analyze(traj).to_text())
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bfsmc",
                                 description="barrier-adaptive sliding-mode simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="simulate a scenario and write its CSV trace")
    runp.add_argument("scenario", help="scenario file path or bundled scenario name")
    runp.add_argument("--out", help="CSV output path")
    runp.add_argument("--decimate", type=int, default=None, metavar="N")
    runp.add_argument("--seed", type=int, default=None)
    runp.add_argument("--h", type=float, default=None, help="step override")
    runp.add_argument("--horizon", type=float, default=None)
    runp.add_argument("--strict", action="store_true",
                      help="exit nonzero on any containment failure")
    runp.set_defaults(func=_cmd_run)

    vp = sub.add_parser("validate-pair", help="run the feedback-pair validation suite")
    vp.add_argument("--r", type=int, required=True)
    vp.add_argument("--p", type=float, required=True)
    vp.add_argument("--kappa", type=float, required=True)
    vp.add_argument("--gains", help="comma-separated gain list")
    vp.add_argument("--tune", action="store_true", help="tune gains first")
    vp.add_argument("--samples", type=int, default=1000)
    vp.add_argument("--seed", type=int, default=0)
    vp.set_defaults(func=_cmd_validate_pair)

    sw = sub.add_parser("sweep", help="grid over one scenario key")
    sw.add_argument("scenario")
    sw.add_argument("--param", required=True, metavar="SECTION.KEY")
    sw.add_argument("--values", required=True, help="comma-separated values")
    sw.add_argument("--outdir", default="sweep_out")
    sw.add_argument("--jobs", type=int, default=None,
                    help="max parallel runs (default: BFSMC_THREADS or CPU count)")
    sw.add_argument("--decimate", type=int, default=None)
    sw.add_argument("--seed", type=int, default=None)
    sw.add_argument("--h", type=float, default=None)
    sw.add_argument("--horizon", type=float, default=None)
    sw.add_argument("--strict", action="store_true")
    sw.set_defaults(func=_cmd_sweep)

    rp = sub.add_parser("report", help="re-analyze an existing CSV trace")
    rp.add_argument("csv")
    rp.set_defaults(func=_cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BfsmcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
