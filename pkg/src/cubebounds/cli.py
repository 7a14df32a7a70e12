"""Command-line front end.

Subcommands: bounds (identified interval and optional tau shift),
calibrate (discrimination fractions to moment budgets), simulate
(coverage experiment against the simulator's oracle), decompose
(per-profile bias split).  Inputs come from flags, a JSON config file,
or both (flags win).  Reports render as text (4 decimals) or as
canonical JSON (full precision, sorted keys) with --json.

Exit codes: 0 success, 1 input error, 2 infeasible budget, 3 solver
non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import sim
from .bounds import (
    BoundsRequest,
    EqualityInfeasibleError,
    GridSpec,
    InfeasibleBudgetError,
    IterationLimitError,
    solve_bounds,
)
from .core import (
    ContingencyTable,
    DegenerateTableError,
    MomentBudget,
    ObservedJoint,
    normalize,
    relative_risk,
    risk_difference,
    risk_x0,
    risk_x1,
)
from .sensitivity import (
    IndividualProfile,
    calibrate_budget,
    decompose,
    population_k,
    shift_interval,
    shift_interval_range,
)

ENV_GRID = "CUBEBOUNDS_GRID_M"
DEFAULT_GRID_M = 64


class CliError(Exception):
    """Input problem; rendered to stderr and mapped to exit code 1."""


def _fmt(x: float) -> str:
    return f"{x:.4f}"


def _pct(x: float) -> str:
    return f"{100.0 * x:.3f}%"


def _emit_json(report: dict) -> None:
    sys.stdout.write(json.dumps(report, indent=2, sort_keys=True,
                                allow_nan=False) + "\n")


# -- input parsing ------------------------------------------------------------

def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror or exc}")


def _table_from_values(values, origin: str) -> ContingencyTable:
    if len(values) != 4:
        raise CliError(f"{origin}: expected 4 cell values "
                       f"(n11 n10 n01 n00), got {len(values)}")
    try:
        return ContingencyTable(*(float(v) for v in values))
    except (TypeError, ValueError) as exc:
        raise CliError(f"{origin}: {exc}")


def _read_table_file(path: str) -> ContingencyTable:
    values = []
    for lineno, line in enumerate(_read_text(path).splitlines(), start=1):
        for token in line.split("#", 1)[0].split():
            try:
                values.append(float(token))
            except ValueError:
                raise CliError(f"{path}:{lineno}: expected a number, "
                               f"got {token!r}")
    return _table_from_values(values, path)


def _load_json(path: str) -> dict:
    text = _read_text(path)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}")
    if not isinstance(data, dict):
        raise CliError(f"{path}: top level must be a JSON object")
    return data


def _check_keys(mapping: dict, allowed: set, origin: str) -> None:
    extra = set(mapping) - allowed
    if extra:
        raise CliError(f"{origin}: unknown keys {sorted(extra)}")


def _number(value, origin: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise CliError(f"{origin}: expected a number, got {value!r}")
    return float(value)


def _read_profiles(path: str):
    """Profiles CSV -> (profiles, weights-or-None); errors name the row."""
    fields = ("pi", "e11", "e10", "e01", "e00", "r_given_1", "r_given_0")
    try:
        handle = open(path, newline="")
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror or exc}")
    with handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        missing = [f for f in fields if f not in header]
        if missing:
            raise CliError(f"{path}:1: missing columns {missing}")
        weighted = "weight" in header
        profiles, weights = [], []
        for lineno, row in enumerate(reader, start=2):
            try:
                profiles.append(IndividualProfile(
                    **{f: float(row[f]) for f in fields}))
                if weighted:
                    weights.append(float(row["weight"]))
            except (TypeError, ValueError) as exc:
                raise CliError(f"{path}:{lineno}: {exc}")
    if not profiles:
        raise CliError(f"{path}: no profile rows")
    return profiles, (weights if weighted else None)


# -- config/flag resolution ---------------------------------------------------

@dataclass
class _Analysis:
    table: ContingencyTable
    joint: ObservedJoint
    budget_mode: str | None      # "explicit" | "discrimination"
    budget: MomentBudget | None
    d_x: float | None
    d_y: float | None
    k_mode: str | None           # "point" | "range" | None
    k_point: float | None
    k_min: float
    k_max: float
    k_source: str | None
    grid: GridSpec
    refine: bool
    refine_tol: float
    max_m: int
    published_rd: float | None


def _env_grid_m() -> int | None:
    raw = os.environ.get(ENV_GRID)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise CliError(f"{ENV_GRID}: expected an integer, got {raw!r}")


def _resolve(args) -> _Analysis:
    cfg = _load_json(args.config) if getattr(args, "config", None) else {}
    origin = getattr(args, "config", None) or "config"
    cfg_dir = Path(args.config).parent if getattr(args, "config", None) else Path(".")
    _check_keys(cfg, {"table", "budget", "k", "grid",
                      "published_risk_difference"}, origin)

    # table: flag path wins over config (path or inline 4 values)
    if getattr(args, "table", None):
        table = _read_table_file(args.table)
    elif "table" in cfg:
        spec = cfg["table"]
        if isinstance(spec, str):
            table = _read_table_file(str(cfg_dir / spec))
        elif isinstance(spec, list):
            table = _table_from_values(spec, f"{origin}: table")
        else:
            raise CliError(f"{origin}: table must be a path or a 4-value list")
    else:
        raise CliError("no table given (use --table or a config with one)")
    joint = normalize(table)

    # budget: exactly one mode among explicit (f, g) and discrimination
    flag_fg = args.f is not None or args.g is not None
    flag_d = args.dx is not None or args.dy is not None
    if flag_fg and flag_d:
        raise CliError("give either --f/--g or --dx/--dy, not both")
    budget_mode = budget = d_x = d_y = None
    if flag_fg:
        if args.f is None or args.g is None:
            raise CliError("--f and --g must be given together")
        budget_mode, budget = "explicit", _budget(args.f, args.g, "flags")
    elif flag_d:
        if args.dx is None or args.dy is None:
            raise CliError("--dx and --dy must be given together")
        budget_mode, d_x, d_y = "discrimination", args.dx, args.dy
    elif "budget" in cfg:
        spec = cfg["budget"]
        if not isinstance(spec, dict):
            raise CliError(f"{origin}: budget must be an object")
        keys = set(spec)
        if keys == {"f", "g"}:
            budget_mode = "explicit"
            budget = _budget(_number(spec["f"], f"{origin}: budget.f"),
                             _number(spec["g"], f"{origin}: budget.g"), origin)
        elif keys == {"d_x", "d_y"}:
            budget_mode = "discrimination"
            d_x = _number(spec["d_x"], f"{origin}: budget.d_x")
            d_y = _number(spec["d_y"], f"{origin}: budget.d_y")
        else:
            raise CliError(f"{origin}: budget needs exactly the keys "
                           f"{{f, g}} or {{d_x, d_y}}")

    # K: at most one of point, range, profiles
    k_given = [name for name, flag in (("--k", args.k is not None),
                                       ("--k-min/--k-max",
                                        args.k_min is not None or args.k_max is not None),
                                       ("config k", "k" in cfg)) if flag]
    if len(k_given) > 1:
        raise CliError(f"multiple K specifications: {', '.join(k_given)}")
    k_mode = k_point = k_source = None
    k_min, k_max = -math.inf, math.inf
    if args.k is not None:
        k_mode, k_point, k_source = "point", args.k, "flag"
    elif args.k_min is not None or args.k_max is not None:
        k_mode, k_source = "range", "flag"
        if args.k_min is not None:
            k_min = args.k_min
        if args.k_max is not None:
            k_max = args.k_max
    elif "k" in cfg:
        spec = cfg["k"]
        if isinstance(spec, (int, float)) and not isinstance(spec, bool):
            k_mode, k_point, k_source = "point", float(spec), origin
        elif isinstance(spec, dict) and "profiles" in spec:
            _check_keys(spec, {"profiles"}, f"{origin}: k")
            profiles, weights = _read_profiles(str(cfg_dir / spec["profiles"]))
            k_mode, k_source = "point", f"profiles ({spec['profiles']})"
            k_point = population_k(profiles, weights)
        elif isinstance(spec, dict):
            _check_keys(spec, {"min", "max"}, f"{origin}: k")
            if not spec:
                raise CliError(f"{origin}: k range needs min and/or max")
            k_mode, k_source = "range", origin
            if "min" in spec:
                k_min = _number(spec["min"], f"{origin}: k.min")
            if "max" in spec:
                k_max = _number(spec["max"], f"{origin}: k.max")
        else:
            raise CliError(f"{origin}: k must be a number, a min/max object, "
                           f"or a profiles object")
    if k_min > k_max:
        raise CliError("k min exceeds k max")

    # grid: flag > config > environment > default; refine flag only enables
    gcfg = cfg.get("grid", {})
    if not isinstance(gcfg, dict):
        raise CliError(f"{origin}: grid must be an object")
    _check_keys(gcfg, {"m", "refine", "refine_tol", "max_m"}, f"{origin}: grid")
    m = args.grid_m
    if m is None and "m" in gcfg:
        m = int(_number(gcfg["m"], f"{origin}: grid.m"))
    if m is None:
        m = _env_grid_m()
    if m is None:
        m = DEFAULT_GRID_M
    refine = bool(args.refine or gcfg.get("refine", False))
    refine_tol = float(gcfg.get("refine_tol", 1e-3))
    max_m = int(gcfg.get("max_m", 256))
    try:
        grid = GridSpec(m)
        if refine_tol <= 0 or max_m < m:
            raise ValueError("refine_tol must be positive and max_m >= m")
    except ValueError as exc:
        raise CliError(str(exc))

    published = None
    if "published_risk_difference" in cfg:
        published = _number(cfg["published_risk_difference"],
                            f"{origin}: published_risk_difference")

    return _Analysis(table=table, joint=joint, budget_mode=budget_mode,
                     budget=budget, d_x=d_x, d_y=d_y, k_mode=k_mode,
                     k_point=k_point, k_min=k_min, k_max=k_max,
                     k_source=k_source, grid=grid, refine=refine,
                     refine_tol=refine_tol, max_m=max_m,
                     published_rd=published)


def _budget(f: float, g: float, origin: str) -> MomentBudget:
    import warnings
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return MomentBudget(f=f, g=g)
    except ValueError as exc:
        raise CliError(f"{origin}: {exc}")


# -- shared report pieces -----------------------------------------------------

def _table_dict(table: ContingencyTable) -> dict:
    return {"n11": table.n11, "n10": table.n10, "n01": table.n01,
            "n00": table.n00, "total": table.total,
            "frequencies": table.is_frequencies}


def _joint_dict(joint: ObservedJoint) -> dict:
    return {"p11": joint.p11, "p10": joint.p10, "p01": joint.p01,
            "p00": joint.p00, "px1": joint.px1, "py1": joint.py1}


def _risks(joint: ObservedJoint) -> dict:
    try:
        r1, r0 = risk_x1(joint), risk_x0(joint)
    except DegenerateTableError:
        return {"risk_x1": None, "risk_x0": None,
                "risk_difference": None, "relative_risk": None}
    rr = relative_risk(joint)
    return {"risk_x1": r1, "risk_x0": r0,
            "risk_difference": risk_difference(joint),
            "relative_risk": None if math.isnan(rr) else rr}


def _table_line(table: ContingencyTable) -> str:
    kind = "frequencies" if table.is_frequencies else "counts"
    cells = " ".join(f"{name}={table_value:g}" for name, table_value in (
        ("n11", table.n11), ("n10", table.n10),
        ("n01", table.n01), ("n00", table.n00)))
    return f"table: {cells} ({kind}, total {table.total:g})"


def _risk_lines(joint: ObservedJoint, published: float | None) -> list[str]:
    risks = _risks(joint)
    lines = []
    if risks["risk_x1"] is None:
        lines.append("risks: undefined (a treatment arm is empty)")
    else:
        rr = risks["relative_risk"]
        lines.append(
            f"risks: Pr(y=1|x=1)={_fmt(risks['risk_x1'])} "
            f"Pr(y=1|x=0)={_fmt(risks['risk_x0'])} "
            f"difference={_fmt(risks['risk_difference'])} "
            f"ratio={'undefined' if rr is None else _fmt(rr)}")
    if published is not None and risks["risk_difference"] is not None:
        lines.append(f"published risk difference: {_pct(published)} "
                     f"(table-derived: {_pct(risks['risk_difference'])})")
    return lines


# -- subcommands ---------------------------------------------------------------

def cmd_bounds(args) -> int:
    a = _resolve(args)
    if a.budget_mode is None:
        raise CliError("no budget given (use --f/--g, --dx/--dy, or a config)")
    if a.budget_mode == "discrimination":
        try:
            budget = calibrate_budget(a.joint, a.d_x, a.d_y)
        except ValueError as exc:
            raise CliError(str(exc))
    else:
        budget = a.budget

    req = BoundsRequest(a.joint, budget, a.grid, refine=a.refine,
                        refine_tol=a.refine_tol, max_m=a.max_m)
    iv = solve_bounds(req)

    report = {
        "table": _table_dict(a.table),
        "joint": _joint_dict(a.joint),
        "risks": _risks(a.joint),
        "budget": {"f": budget.f, "g": budget.g, "mode": a.budget_mode,
                   "d_x": a.d_x, "d_y": a.d_y},
        "grid": {"m_start": a.grid.m, "m_final": iv.grid_resolution,
                 "refine": a.refine, "converged": iv.converged},
        "interval": {"L": iv.L, "U": iv.U, "width": iv.width},
        "certificates": {
            "min": [list(atom) for atom in iv.certificate_min.support()],
            "max": [list(atom) for atom in iv.certificate_max.support()],
        },
    }
    if a.published_rd is not None:
        report["published_risk_difference"] = a.published_rd

    tau_lines = []
    if a.k_mode == "point":
        tau = shift_interval(iv, a.k_point)
        report["tau"] = {"mode": "point", "K": tau.K,
                         "lower": tau.lower, "upper": tau.upper}
        tau_lines.append(f"tau (K={_fmt(tau.K)}): "
                         f"{_fmt(tau.lower)} <= tau <= {_fmt(tau.upper)}")
    elif a.k_mode == "range":
        sr = shift_interval_range(iv, a.k_min, a.k_max)
        report["tau"] = {
            "mode": "range",
            "k_min": None if math.isinf(sr.k_min) else sr.k_min,
            "k_max": None if math.isinf(sr.k_max) else sr.k_max,
            "lower": None if math.isinf(sr.lower) else sr.lower,
            "upper": None if math.isinf(sr.upper) else sr.upper,
        }
        if math.isinf(sr.k_max):
            tau_lines.append(f"tau (K >= {_fmt(sr.k_min)}): "
                             f"tau <= {_fmt(sr.upper)} (no lower bound)")
        elif math.isinf(sr.k_min):
            tau_lines.append(f"tau (K <= {_fmt(sr.k_max)}): "
                             f"tau >= {_fmt(sr.lower)} (no upper bound)")
        else:
            tau_lines.append(
                f"tau (K in [{_fmt(sr.k_min)}, {_fmt(sr.k_max)}]): "
                f"{_fmt(sr.lower)} <= tau <= {_fmt(sr.upper)}")

    if args.json:
        _emit_json(report)
        return 0

    lines = [_table_line(a.table),
             f"joint: p11={_fmt(a.joint.p11)} p10={_fmt(a.joint.p10)} "
             f"p01={_fmt(a.joint.p01)} p00={_fmt(a.joint.p00)} "
             f"(px1={_fmt(a.joint.px1)}, py1={_fmt(a.joint.py1)})"]
    lines += _risk_lines(a.joint, a.published_rd)
    mode = (a.budget_mode if a.budget_mode == "explicit"
            else f"discrimination d_x={_fmt(a.d_x)} d_y={_fmt(a.d_y)}")
    lines.append(f"budget: f={_fmt(budget.f)} g={_fmt(budget.g)} ({mode})")
    lines.append(f"grid: m={iv.grid_resolution} "
                 f"({'refined' if a.refine else 'fixed'}, "
                 f"{'converged' if iv.converged else 'not converged'})")
    lines.append(f"psi: {_fmt(iv.L)} <= psi <= {_fmt(iv.U)} "
                 f"(width {_fmt(iv.width)})")
    n_min = len(iv.certificate_min.support())
    n_max = len(iv.certificate_max.support())
    lines.append(f"certificates: {n_min} atom{'s' * (n_min != 1)} (min), "
                 f"{n_max} atom{'s' * (n_max != 1)} (max)")
    lines += tau_lines
    print("\n".join(lines))
    return 0


def cmd_calibrate(args) -> int:
    a = _resolve(args)
    if a.budget_mode != "discrimination":
        raise CliError("calibrate needs discrimination fractions "
                       "(--dx/--dy or a config with budget.d_x/d_y)")
    try:
        budget = calibrate_budget(a.joint, a.d_x, a.d_y)
    except ValueError as exc:
        raise CliError(str(exc))
    report = {
        "table": _table_dict(a.table),
        "joint": _joint_dict(a.joint),
        "d_x": a.d_x,
        "d_y": a.d_y,
        "f": budget.f,
        "g": budget.g,
    }
    if args.json:
        _emit_json(report)
        return 0
    print("\n".join([
        _table_line(a.table),
        f"joint: px1={_fmt(a.joint.px1)} py1={_fmt(a.joint.py1)}",
        f"discrimination: d_x={_fmt(a.d_x)} d_y={_fmt(a.d_y)}",
        f"budget: f={_fmt(budget.f)} g={_fmt(budget.g)}",
    ]))
    return 0


def _version_model(spec: dict, index: int, origin: str) -> tuple[sim.VersionModel, float]:
    name = f"{origin}: types[{index}]"
    if not isinstance(spec, dict):
        raise CliError(f"{name} must be an object")
    _check_keys(spec, {"share", "label", "versions", "dist", "rule",
                       "outcome", "dist_under_0", "dist_under_1"}, name)
    for key in ("share", "versions", "dist", "rule", "outcome"):
        if key not in spec:
            raise CliError(f"{name}: missing key {key!r}")
    try:
        model = sim.VersionModel(
            versions=tuple(str(v) for v in spec["versions"]),
            version_dist=tuple(float(v) for v in spec["dist"]),
            natural_treatment=tuple(float(v) for v in spec["rule"]),
            outcome_prob=tuple((float(p[0]), float(p[1]))
                               for p in spec["outcome"]),
            dist_under_0=(tuple(float(v) for v in spec["dist_under_0"])
                          if "dist_under_0" in spec else None),
            dist_under_1=(tuple(float(v) for v in spec["dist_under_1"])
                          if "dist_under_1" in spec else None),
            label=str(spec.get("label", "")),
        )
    except (TypeError, ValueError, IndexError) as exc:
        raise CliError(f"{name}: {exc}")
    return model, _number(spec["share"], f"{name}: share")


def _population_spec(path: str, seed_override: int | None) -> sim.PopulationSpec:
    raw = _load_json(path)
    _check_keys(raw, {"N", "seed", "types"}, path)
    for key in ("N", "seed", "types"):
        if key not in raw:
            raise CliError(f"{path}: missing key {key!r}")
    if not isinstance(raw["types"], list) or not raw["types"]:
        raise CliError(f"{path}: types must be a non-empty list")
    types = tuple(_version_model(t, i, path) for i, t in enumerate(raw["types"]))
    try:
        return sim.PopulationSpec(
            types=types,
            N=int(_number(raw["N"], f"{path}: N")),
            seed=(seed_override if seed_override is not None
                  else int(_number(raw["seed"], f"{path}: seed"))))
    except ValueError as exc:
        raise CliError(f"{path}: {exc}")


def cmd_simulate(args) -> int:
    if args.runs < 1:
        raise CliError("--runs must be at least 1")
    spec = _population_spec(args.spec, args.seed)
    m = args.grid_m if args.grid_m is not None else (_env_grid_m() or DEFAULT_GRID_M)
    try:
        grid = GridSpec(m)
    except ValueError as exc:
        raise CliError(str(exc))
    try:
        report = sim.coverage_experiment(spec, args.runs, grid=grid)
    except ValueError as exc:
        raise CliError(str(exc))

    s = report.oracle
    payload = {
        "N": spec.N,
        "seed": spec.seed,
        "runs": report.runs,
        "grid_m": report.grid_m,
        "epsilon": report.epsilon,
        "budget": {"f": report.budget.f, "g": report.budget.g},
        "budget_violation": report.budget_violation,
        "oracle": {
            "psi": s.psi, "tau": s.tau, "K": s.K,
            "f_true": s.f_true, "g_true": s.g_true,
            "per_type": [{"pi": t.pi, "r_given_0": t.r_given_0,
                          "r_given_1": t.r_given_1, "r_int_0": t.r_int_0,
                          "r_int_1": t.r_int_1, "share": share}
                         for t, share in zip(s.per_type, s.shares)],
        },
        "coverage": {"psi": report.psi_coverage, "tau": report.tau_coverage},
        "rows": [{"run": r.run, "L": r.L, "U": r.U,
                  "psi_covered": r.psi_covered, "tau_covered": r.tau_covered}
                 for r in report.rows],
    }
    if args.json:
        _emit_json(payload)
        return 0

    lines = [
        f"population: N={spec.N} seed={spec.seed} types={len(spec.types)}",
        f"oracle: psi={_fmt(s.psi)} tau={_fmt(s.tau)} K={_fmt(s.K)} "
        f"f_true={_fmt(s.f_true)} g_true={_fmt(s.g_true)}",
        f"budget: f={_fmt(report.budget.f)} g={_fmt(report.budget.g)} "
        f"(oracle moments + 3 SE)"
        + (" [below oracle moments]" if report.budget_violation else ""),
        f"grid: m={report.grid_m} (tolerance {_fmt(report.epsilon)})",
        "run      L       U  psi  tau",
    ]
    for r in report.rows:
        lines.append(f"{r.run:3d} {_fmt(r.L):>7} {_fmt(r.U):>7} "
                     f"{'yes' if r.psi_covered else 'NO ':>4} "
                     f"{'yes' if r.tau_covered else 'NO ':>4}")
    lines.append(f"coverage: psi {report.psi_coverage:.1%}, "
                 f"tau {report.tau_coverage:.1%} over {report.runs} runs")
    print("\n".join(lines))
    return 0


def cmd_decompose(args) -> int:
    profiles, weights = _read_profiles(args.profiles)
    rows = []
    for i, profile in enumerate(profiles):
        d = decompose(profile)
        rows.append({"row": i + 1, "delta1": d.delta1, "delta2": d.delta2,
                     "k": d.k})
    pop = population_k(profiles, weights)
    if args.json:
        _emit_json({"count": len(profiles), "population_K": pop,
                    "weighted": weights is not None, "profiles": rows})
        return 0
    lines = ["row   delta1   delta2        k"]
    for r in rows:
        lines.append(f"{r['row']:3d} {_fmt(r['delta1']):>8} "
                     f"{_fmt(r['delta2']):>8} {_fmt(r['k']):>8}")
    suffix = "weighted" if weights is not None else "unweighted"
    lines.append(f"population K: {_fmt(pop)} ({len(profiles)} profiles, {suffix})")
    print("\n".join(lines))
    return 0


# -- parser and entry point ----------------------------------------------------

class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract reserves 2 for
    infeasible budgets, so usage errors are remapped to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_analysis_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--table", help="table file: 4 values n11 n10 n01 n00")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--f", type=float, help="propensity moment budget")
    p.add_argument("--g", type=float, help="prognosis moment budget")
    p.add_argument("--dx", type=float, help="propensity discrimination in [0,1]")
    p.add_argument("--dy", type=float, help="prognosis discrimination in [0,1]")
    p.add_argument("--grid-m", type=int, help=f"grid points per axis "
                   f"(default ${ENV_GRID} or {DEFAULT_GRID_M})")
    p.add_argument("--json", action="store_true", help="machine-readable output")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cubebounds",
                     description="Partial identification of causal effects "
                                 "from 2x2 treatment/outcome tables.")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("bounds", help="identified interval for psi, "
                                      "optionally shifted to tau")
    _add_analysis_flags(p)
    p.add_argument("--k", type=float, help="known bias K")
    p.add_argument("--k-min", type=float, help="lower end of a K range")
    p.add_argument("--k-max", type=float, help="upper end of a K range")
    p.add_argument("--refine", action="store_true",
                   help="double the grid until the endpoints stabilize")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("calibrate", help="moment budgets from "
                                         "discrimination fractions")
    _add_analysis_flags(p)
    p.set_defaults(func=cmd_calibrate, k=None, k_min=None, k_max=None,
                   refine=False)

    p = sub.add_parser("simulate", help="coverage experiment against a "
                                        "population spec")
    p.add_argument("spec", help="population spec JSON file")
    p.add_argument("--runs", type=int, default=10, help="number of runs")
    p.add_argument("--seed", type=int, help="override the spec seed")
    p.add_argument("--grid-m", type=int, help="grid points per axis")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("decompose", help="per-profile bias split and "
                                         "population K")
    p.add_argument("profiles", help="profiles CSV file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_decompose)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse raises even for --help; keep main() returning an int
        return int(exc.code or 0)
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DegenerateTableError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InfeasibleBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.minimal_f is not None:
            print(f"  least feasible f at the given g: {exc.minimal_f:.6g}",
                  file=sys.stderr)
        if exc.minimal_g is not None:
            print(f"  least feasible g at the given f: {exc.minimal_g:.6g}",
                  file=sys.stderr)
        return 2
    except EqualityInfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except IterationLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
