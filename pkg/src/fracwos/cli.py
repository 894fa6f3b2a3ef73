"""Command-line front end: solve problems from config files or presets,
dump sample paths, collect step statistics, and tabulate reference values.

Precedence for every setting is flag > config file > preset default.  Output
files are byte-identical for identical config and seed, so timing never goes
into them (it is printed to stderr instead).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import montecarlo, reference
from .geometry import Ball, parse_domain, swiss_cheese
from .montecarlo import ToleranceNotReached, estimate_adaptive, estimate_fixed, \
    geometric_parameter, step_statistics
from .reference import ExteriorData, ProblemSpec, SourceData, \
    ball_poisson_reference, dyda_exact, green_reference
from .stable_sampler import RngStream, StableParams
from .wos_engine import StepCapExceeded, simulate_path

_START_POINT = (math.sqrt(0.29), -math.sqrt(0.7))

PRESETS = {
    "green": {
        "domain": {"ball": {"center": [0.0, 0.0], "radius": 1.0}},
        "g": {"green": {"pole": [2.0, 0.0]}},
        "x": [[0.6, 0.6]],
        "n": 1_000_000,
    },
    "gaussian": {
        "domain": {"ball": {"center": [0.0, 0.0], "radius": 1.0}},
        "g": {"gaussian": {"pole": [2.0, 0.0]}},
        "x": [[0.6, 0.6]],
        "tol": 1e-4,
    },
    "dyda": {
        "domain": {"ball": {"center": [0.0, 0.0], "radius": 1.0}},
        "g": {"constant": 0.0},
        "f": {"dyda": {}},
        "x": [[0.6, 0.6]],
        "tol": 1e-3,
        "n_inner": 1000,
    },
    "swisscheese-steps": {
        "domain": {"swiss_cheese": {"radius": 1.0, "extent": 10}},
        "x": [list(_START_POINT)],
        "runs": 100_000,
    },
}

_DEFAULTS = {
    "alpha": 1.0,
    "dim": 2,
    "seed": None,
    "workers": 1,
    "eps_skin": 0.0,
    "n_inner": 1000,
    "batch": 10_000,
    "n_min": 10_000,
    "n_max": 100_000_000,
    "step_cap": 1_000_000,
    "format": "json",
    "output": None,
    "g_square_integrable": True,
    "pvalue_tol": 1e-4,
    "quad_tol": 1e-8,
}


class ConfigError(ValueError):
    pass


def _parse_point(text):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError as e:
        raise ConfigError(f"bad point {text!r}: {e}") from None


def _resolve(args) -> dict:
    cfg = dict(_DEFAULTS)
    builtin = getattr(args, "builtin", None)
    filecfg = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                filecfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config file: {e}") from None
        builtin = builtin or filecfg.get("builtin")
    if builtin:
        if builtin not in PRESETS:
            raise ConfigError(f"unknown preset {builtin!r} "
                              f"(choose from {sorted(PRESETS)})")
        cfg.update(PRESETS[builtin])
        cfg["builtin"] = builtin
    for key, val in filecfg.items():
        cfg[key] = val
    for key in ("alpha", "dim", "seed", "workers", "eps_skin", "n_inner",
                "batch", "n_min", "n_max", "step_cap", "n", "tol", "runs",
                "steps", "output", "format", "domain", "pvalue_tol",
                "quad_tol", "swiss_radius"):
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None:
            cfg[key] = val
    if getattr(args, "x", None):
        cfg["x"] = [_parse_point(t) for t in args.x]
    if cfg.get("seed") is None:
        cfg["seed"] = int(os.environ.get("FRACWOS_SEED", "0"))
    if isinstance(cfg.get("domain"), str):
        try:
            cfg["domain"] = json.loads(cfg["domain"])
        except json.JSONDecodeError as e:
            raise ConfigError(f"bad inline domain JSON: {e}") from None
    if cfg.get("swiss_radius") is not None and "swiss_cheese" in \
            (cfg.get("domain") or {}):
        cfg["domain"]["swiss_cheese"]["radius"] = cfg["swiss_radius"]
    return cfg


def _build_problem(cfg) -> ProblemSpec:
    for key in ("domain", "g", "x"):
        if key not in cfg:
            raise ConfigError(f"config is missing required key {key!r}")
    try:
        domain = parse_domain(cfg["domain"])
        params = StableParams(float(cfg["alpha"]), int(cfg["dim"]))
        g = ExteriorData.from_config(cfg["g"])
        f = SourceData.from_config(cfg["f"]) if cfg.get("f") else None
        tol = cfg.get("tol")
        n = cfg.get("n")
        if tol is not None and n is not None:
            raise ConfigError("give either 'tol' or 'n', not both")
        if tol is None and n is None:
            raise ConfigError("one of 'tol' or 'n' is required for solve")
        problem = ProblemSpec(
            domain=domain, params=params, g=g, f=f, eval_points=cfg["x"],
            tol=float(tol) if tol is not None else None,
            n_samples=int(n) if n is not None else None,
            seed=int(cfg["seed"]), eps_skin=float(cfg["eps_skin"]),
            n_inner=int(cfg["n_inner"]),
            g_square_integrable=bool(cfg.get("g_square_integrable", True)),
            step_cap=int(cfg["step_cap"]))
    except (ValueError, KeyError, TypeError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(str(e)) from None
    if not problem.g_square_integrable:
        print("warning: exterior data flagged non-square-integrable; the "
              "variance and standard error may be meaningless", file=sys.stderr)
    return problem


def _fmt(x) -> str:
    return repr(float(x))


def _write(path, text):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config_comment(cfg):
    keep = {k: v for k, v in sorted(cfg.items()) if v is not None}
    return "# config: " + json.dumps(keep, sort_keys=True)


def _cmd_solve(cfg) -> int:
    problem = _build_problem(cfg)
    status = 0
    results = []
    for point in problem.eval_points:
        try:
            if problem.n_samples is not None:
                est = estimate_fixed(problem, point, problem.n_samples,
                                     seed=problem.seed,
                                     workers=int(cfg["workers"]))
            else:
                est = estimate_adaptive(problem, point, problem.tol,
                                        batch=int(cfg["batch"]),
                                        n_min=int(cfg["n_min"]),
                                        n_max=int(cfg["n_max"]),
                                        seed=problem.seed,
                                        workers=int(cfg["workers"]))
        except (ToleranceNotReached, StepCapExceeded) as e:
            status = 3
            est = getattr(e, "estimate", None)
            print(f"warning: {e}", file=sys.stderr)
            if est is None:
                continue
        if est.n_aborted:
            status = 3
        print(f"u({', '.join(_fmt(v) for v in point)}) = {est.mean!r} "
              f"+- {est.std_error!r}  [n={est.n}, {est.wall_seconds:.2f}s]",
              file=sys.stderr)
        results.append((point, est))
    if cfg["format"] == "json":
        doc = {"config": {k: v for k, v in sorted(cfg.items()) if v is not None},
               "results": [{"point": p.tolist(),
                            "estimate": e.to_record(include_timing=False)}
                           for p, e in results]}
        _write(cfg["output"], json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        lines = [_config_comment(cfg),
                 "point,mean,var,n,std_error,stop_reason,n_aborted"]
        for p, e in results:
            pt = " ".join(_fmt(v) for v in p)
            lines.append(f"{pt},{_fmt(e.mean)},{_fmt(e.var)},{e.n},"
                         f"{_fmt(e.std_error)},{e.stop_reason},{e.n_aborted}")
        _write(cfg["output"], "\n".join(lines) + "\n")
    return status


def _cmd_path(cfg) -> int:
    params = StableParams(float(cfg["alpha"]), int(cfg["dim"]))
    tol = float(cfg.get("tol") or 1e-6)
    steps = int(cfg.get("steps") or 10_000)
    x0 = cfg.get("x", [[0.0] * params.dim])[0]
    rec = simulate_path(x0, params, tol, steps, RngStream(int(cfg["seed"])))
    if cfg["format"] == "json":
        doc = {"alpha": params.alpha, "dim": params.dim, "tol": tol,
               "seed": int(cfg["seed"]), "points": rec.points.tolist()}
        _write(cfg["output"], json.dumps(doc, sort_keys=True) + "\n")
        return 0
    lines = [_config_comment(cfg),
             "alpha,dim,tol,seed",
             f"{_fmt(params.alpha)},{params.dim},{_fmt(tol)},{int(cfg['seed'])}",
             ",".join(f"x{j}" for j in range(params.dim))]
    for p in rec.points:
        lines.append(",".join(_fmt(v) for v in p))
    _write(cfg["output"], "\n".join(lines) + "\n")
    return 0


def _cmd_steps(cfg) -> int:
    if "domain" not in cfg:
        raise ConfigError("steps needs a domain (or --builtin swisscheese-steps)")
    domain = parse_domain(cfg["domain"])
    params = StableParams(float(cfg["alpha"]), int(cfg["dim"]))
    x0 = cfg.get("x", [list(_START_POINT)])[0]
    runs = int(cfg.get("runs") or 100_000)
    hist = step_statistics(domain, params, x0, runs,
                           eps_skin=float(cfg["eps_skin"]),
                           seed=int(cfg["seed"]))
    method = "quadrature" if params.dim == 2 else "montecarlo"
    p = geometric_parameter(params, method, tol=float(cfg["pvalue_tol"]),
                            seed=int(cfg["seed"]) + 1)
    print(f"mean steps {hist.mean_steps:.4f} over {hist.runs} runs; "
          f"geometric parameter {p:.6f} (1/p = {1 / p:.3f})", file=sys.stderr)
    if cfg["format"] == "json":
        doc = {"config": {k: v for k, v in sorted(cfg.items()) if v is not None},
               "mean_steps": hist.mean_steps, "runs": hist.runs,
               "geom_p": p,
               "rows": [{"n": n, "count": c, "tail": t,
                         "geom_tail": (1.0 - p) ** n}
                        for n, c, t in hist.rows()]}
        _write(cfg["output"], json.dumps(doc, indent=2, sort_keys=True) + "\n")
        return 0
    lines = [_config_comment(cfg), "n,count,tail,geom_tail"]
    for n, c, t in hist.rows():
        lines.append(f"{n},{c},{_fmt(t)},{_fmt((1.0 - p) ** n)}")
    _write(cfg["output"], "\n".join(lines) + "\n")
    return 0


def _cmd_pvalue(cfg) -> int:
    params = StableParams(float(cfg["alpha"]), int(cfg["dim"]))
    tol = float(cfg["pvalue_tol"])
    out = {"alpha": params.alpha, "dim": params.dim, "tol": tol}
    status = 0
    try:
        if params.dim == 2:
            out["quadrature"] = geometric_parameter(params, "quadrature", tol)
        out["montecarlo"] = geometric_parameter(params, "montecarlo", tol,
                                                seed=int(cfg["seed"]))
    except ToleranceNotReached as e:
        print(f"warning: {e}", file=sys.stderr)
        status = 3
    if cfg["format"] == "json":
        _write(cfg["output"], json.dumps(out, indent=2, sort_keys=True) + "\n")
    else:
        keys = sorted(out)
        lines = [_config_comment(cfg), ",".join(keys),
                 ",".join(_fmt(out[k]) if isinstance(out[k], float) else
                          str(out[k]) for k in keys)]
        _write(cfg["output"], "\n".join(lines) + "\n")
    return status


def _cmd_reference(cfg) -> int:
    builtin = cfg.get("builtin")
    if builtin not in ("green", "gaussian", "dyda"):
        raise ConfigError("reference needs --builtin green|gaussian|dyda")
    params = StableParams(float(cfg["alpha"]), int(cfg["dim"]))
    points = [np.asarray(p, dtype=np.float64) for p in
              cfg.get("x", PRESETS[builtin]["x"])]
    rows = []
    for p in points:
        if builtin == "green":
            val = green_reference(p, PRESETS["green"]["g"]["green"]["pole"],
                                  params)
        elif builtin == "gaussian":
            val = ball_poisson_reference(
                p, PRESETS["gaussian"]["g"]["gaussian"]["pole"], params,
                quad_tol=float(cfg["quad_tol"]))
        else:
            val = dyda_exact(p, params.alpha)
        rows.append((p, val))
    if cfg["format"] == "json":
        doc = {"builtin": builtin, "alpha": params.alpha, "dim": params.dim,
               "values": [{"point": p.tolist(), "value": v} for p, v in rows]}
        _write(cfg["output"], json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        lines = [_config_comment(cfg), "point,value"]
        for p, v in rows:
            lines.append(f"{' '.join(_fmt(c) for c in p)},{_fmt(v)}")
        _write(cfg["output"], "\n".join(lines) + "\n")
    return 0


def _add_common(sub):
    sub.add_argument("--config", help="JSON config file")
    sub.add_argument("--alpha", type=float)
    sub.add_argument("--dim", type=int)
    sub.add_argument("--seed", type=int)
    sub.add_argument("--workers", type=int)
    sub.add_argument("--output", "-o")
    sub.add_argument("--format", choices=("csv", "json"))
    sub.add_argument("--domain", help="inline domain description (JSON)")
    sub.add_argument("--x", action="append",
                     help="evaluation/start point, comma-separated (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fracwos",
        description="Walk-on-spheres Monte Carlo solver for the fractional "
                    "Dirichlet and Poisson problems")
    sp = ap.add_subparsers(dest="command", required=True)

    s = sp.add_parser("solve", help="estimate the solution at points")
    _add_common(s)
    s.add_argument("--builtin", help="preset problem (green, gaussian, dyda)")
    s.add_argument("--n", type=int, help="fixed sample count")
    s.add_argument("--tol", type=float, help="adaptive standard-error target")
    s.add_argument("--batch", type=int)
    s.add_argument("--n-min", dest="n_min", type=int)
    s.add_argument("--n-max", dest="n_max", type=int)
    s.add_argument("--eps-skin", dest="eps_skin", type=float)
    s.add_argument("--n-inner", dest="n_inner", type=int)
    s.add_argument("--step-cap", dest="step_cap", type=int)

    s = sp.add_parser("path", help="simulate a phase-space sample path")
    _add_common(s)
    s.add_argument("--tol", type=float, help="ball radius per step")
    s.add_argument("--steps", type=int)

    s = sp.add_parser("steps", help="step-count statistics of repeated walks")
    _add_common(s)
    s.add_argument("--builtin", help="preset (swisscheese-steps)")
    s.add_argument("--runs", type=int)
    s.add_argument("--eps-skin", dest="eps_skin", type=float)
    s.add_argument("--swiss-radius", dest="swiss_radius", type=float,
                   help="ball radius of the swiss-cheese grid (1.0 or 0.5)")
    s.add_argument("--pvalue-tol", dest="pvalue_tol", type=float)

    s = sp.add_parser("pvalue", help="geometric step parameter by two routes")
    _add_common(s)
    s.add_argument("--pvalue-tol", dest="pvalue_tol", type=float)

    s = sp.add_parser("reference", help="tabulate reference solution values")
    _add_common(s)
    s.add_argument("--builtin", help="which reference (green, gaussian, dyda)")
    s.add_argument("--quad-tol", dest="quad_tol", type=float)
    return ap


_DISPATCH = {
    "solve": _cmd_solve,
    "path": _cmd_path,
    "steps": _cmd_steps,
    "pvalue": _cmd_pvalue,
    "reference": _cmd_reference,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve(args)
        return _DISPATCH[args.command](cfg)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ToleranceNotReached, StepCapExceeded) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
