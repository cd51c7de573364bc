"""Command-line front end: one JSON config in, one JSON report out.

Exit status is 0 when every certificate passes, 2 on a certified failure
(the report names the failing clause) and 1 on bad input (a JSON error
object goes to standard error).
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from typing import Sequence

import jsonschema
import numpy as np

from . import borsuk, counterexample, sgcore, univariate
from .convexity import ConvexityCertificate, midpoint_convexity_test
from .errors import ConvexAlgError, DimensionMismatch, EmptyGrid, NotConverged, OriginNotInterior, UnboundedBody
from .funcexpr import AffineFunc, FunctionExpr, Polynomial, expr_from_json, sup_norm_on_grid
from .geometry import ConvexBody, body_from_json, bounding_box, lattice_points, make_grid, sample_points

SCHEMA_VERSION = "convexalg/1"
COMMANDS = ("approx", "prop3", "sg-check", "borsuk", "counterexample", "convexity-test", "separates-points")

# errors that mean the config describes something we cannot run on
INPUT_ERRORS = (DimensionMismatch, UnboundedBody, EmptyGrid, OriginNotInterior)


def separates_points(generators: Sequence[FunctionExpr], K: ConvexBody, n_pairs: int = 500, seed: int = 0,
                     tol: float = 1e-9, per_axis: int = 3) -> ConvexityCertificate:
    """Does some generator tell apart every sampled pair ``x != y`` of ``K``?"""
    lat = lattice_points(bounding_box(K), per_axis)
    lat = lat[K.contains_batch(lat)]
    ii, jj = np.triu_indices(lat.shape[0], k=1)
    P1, P2 = [lat[ii]], [lat[jj]]
    if n_pairs > 0:
        pts = sample_points(K, 2 * n_pairs, np.random.default_rng(seed))
        half = pts.shape[0] // 2
        P1.append(pts[:half])
        P2.append(pts[half:2 * half])
    X1, X2 = np.vstack(P1), np.vstack(P2)
    distinct = np.any(X1 != X2, axis=1)
    X1, X2 = X1[distinct], X2[distinct]
    if not generators:
        diff = np.zeros(X1.shape[0])
    else:
        diff = np.max(np.abs(np.vstack([g.evaluate(X1) - g.evaluate(X2) for g in generators])), axis=0)
    bad = np.nonzero(diff <= tol)[0]
    res = {"lattice_per_axis": per_axis, "random_pairs": n_pairs, "seed": seed}
    min_sep = float(diff.min()) if diff.size else 0.0
    if bad.size:
        i = int(bad[0])
        return ConvexityCertificate("separates_points", "fail", int(diff.size), tol,
                                    (X1[i], X2[i], float(diff[i])), tol - min_sep, res)
    return ConvexityCertificate("separates_points", "pass", int(diff.size), tol, None, 0.0, res)


# ---------------------------------------------------------------------------
# config schema

_EXPR = {"type": "object", "required": ["type"]}
_BODY = {"type": "object", "required": ["type"]}
_COMMON = {
    "command": {"enum": list(COMMANDS)},
    "seed": {"type": "integer", "minimum": 0},
    "output": {"type": "string"},
}


def _schema(required, **props):
    properties = dict(_COMMON)
    properties.update(props)
    return {"type": "object", "required": ["command"] + required, "properties": properties,
            "additionalProperties": False}


_POS = {"type": "number", "exclusiveMinimum": 0}
_INT = {"type": "integer", "minimum": 1}
SCHEMAS = {
    "approx": _schema(["body", "function", "eps"], body=_BODY, function=_EXPR, eps=_POS,
                      per_axis=_INT, n_pairs=_INT, check_per_axis=_INT),
    "prop3": _schema(["function", "interval", "eps"], function=_EXPR, eps=_POS, n_cap=_INT,
                     interval={"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                     generator=_EXPR),
    "sg-check": _schema(["body", "eps"], body=_BODY, eps=_POS, n_pairs=_INT, tol=_POS),
    "borsuk": _schema(["body", "functions"], body=_BODY, functions={"type": "array", "items": _EXPR, "minItems": 2},
                      tol=_POS, grid_size=_INT, n_cap=_INT),
    "counterexample": _schema(["body", "functions", "eps"], body=_BODY, eps=_POS, tol=_POS,
                              functions={"type": "array", "items": _EXPR, "minItems": 2},
                              per_axis=_INT, n_members=_INT, n_pairs=_INT),
    "convexity-test": _schema(["body", "function"], body=_BODY, function=_EXPR, n_pairs=_INT, tol=_POS,
                              per_axis=_INT),
    "separates-points": _schema(["body", "functions"], body=_BODY, functions={"type": "array", "items": _EXPR},
                                n_pairs=_INT, tol=_POS),
}


class InputError(Exception):
    def __init__(self, kind, message):
        super().__init__(message)
        self.kind = kind


def validate(config) -> None:
    if not isinstance(config, dict) or config.get("command") not in COMMANDS:
        raise InputError("schema", f"config must be an object with command in {list(COMMANDS)}")
    try:
        jsonschema.validate(config, SCHEMAS[config["command"]])
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        raise InputError("schema", f"{path or '<root>'}: {exc.message}") from None


def config_digest(config: dict) -> str:
    """SHA-256 of the canonical config; the report destination does not affect the digest."""
    config = {k: v for k, v in config.items() if k != "output"}
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _clean(obj):
    """JSON-safe copy: numpy scalars to floats, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    return obj


# ---------------------------------------------------------------------------
# commands; each returns (result dict, tolerances dict, passed, csv tables)


def _body(cfg):
    try:
        return body_from_json(cfg["body"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError("body", str(exc)) from None


def _expr(obj):
    try:
        return expr_from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError("function", str(exc)) from None


def _poly(obj, dim=None):
    e = _expr(obj)
    if isinstance(e, AffineFunc):
        e = e.to_polynomial()
    if not isinstance(e, Polynomial):
        raise InputError("function", "expected a polynomial")
    if dim is not None and e.dim != dim:
        raise InputError("function", f"function has dimension {e.dim}, body {dim}")
    return e


def cmd_approx(cfg, seed):
    K = _body(cfg)
    p = _poly(cfg["function"], K.dim)
    eps = float(cfg["eps"])
    per_axis = cfg.get("per_axis", 41)
    n_pairs = cfg.get("n_pairs", 500)
    rep = univariate.convex_exp_approx(p, K, eps, per_axis=per_axis, n_pairs=n_pairs, seed=seed)
    check = make_grid(K, cfg.get("check_per_axis", 101 if K.dim <= 2 else 15), seed + 1)
    diff = rep.approximant.evaluate(check.points) - p.evaluate(check.points)
    independent = float(np.max(np.abs(diff)))
    result = rep.to_json()
    result["independent_error"] = independent
    result["independent_points"] = len(check)
    passed = rep.passed and independent <= eps
    X = check.points
    header = [f"x{j + 1}" for j in range(K.dim)] + ["p", "approximant"]
    rows = np.column_stack([X, p.evaluate(X), rep.approximant.evaluate(X)])
    tols = {"eps": eps, "midpoint_tol": 1e-9, "n_pairs": n_pairs, "per_axis": per_axis}
    return result, tols, passed, {"approx.csv": (header, rows)}


def cmd_prop3(cfg, seed):
    p = _poly(cfg["function"], 1)
    a, b = (float(v) for v in cfg["interval"])
    eps = float(cfg["eps"])
    try:
        if "generator" in cfg:
            gen = univariate.MonotoneGenerator.certify(_expr(cfg["generator"]), a, b)
        else:
            gen = univariate.exp_generator(a, b)
    except ValueError as exc:
        raise InputError("generator", str(exc)) from None
    rep = univariate.prop3_pipeline(p, gen, eps, n_cap=cfg.get("n_cap", univariate.N_CAP))
    xs = np.linspace(a, b, 10001)
    out = rep.output.evaluate(xs[:, None])
    independent = float(np.max(np.abs(out - p.evaluate(xs[:, None]))))
    result = rep.to_json()
    result["generator"] = gen.to_json()
    result["independent_error"] = independent
    passed = rep.passed and independent <= eps
    rows = np.column_stack([xs, p.evaluate(xs[:, None]), out])
    tols = {"eps": eps, "lattice": univariate.LATTICE, "n_cap": cfg.get("n_cap", univariate.N_CAP)}
    return result, tols, passed, {"prop3.csv": (["x", "p", "approximant"], rows)}


def cmd_sg_check(cfg, seed):
    K = _body(cfg)
    d = K.dim
    eps = float(cfg["eps"])
    tol = cfg.get("tol", 1e-9)
    n_pairs = cfg.get("n_pairs", 500)
    lo, hi = K.bounds()
    N = float(max(np.max(np.abs(lo)), np.max(np.abs(hi))))
    if not 0 < N <= univariate.MAX_EXP_HALF_WIDTH:
        raise InputError("body", f"body must lie inside [-{univariate.MAX_EXP_HALF_WIDTH}, "
                                 f"{univariate.MAX_EXP_HALF_WIDTH}]^d")
    gens = univariate.exp_sg_approx(d, N, eps, intervals=list(zip(lo, hi)))
    sg = sgcore.canonical_sg_set(d)
    grid = make_grid(K, 41 if d <= 2 else 15, seed)
    items = []
    passed = True
    for k, (h, l) in enumerate(zip(gens, sg.generators)):
        err = sup_norm_on_grid(h - l, grid)
        cert = midpoint_convexity_test(h, K, n_pairs=n_pairs, tol=tol, seed=seed + k)
        ok = cert.passed and err <= eps
        passed = passed and ok
        items.append({"index": k + 1, "error": err, "convexity": cert.to_json(), "passed": ok})
    sep = separates_points(gens, K, n_pairs=n_pairs, seed=seed, tol=tol)
    passed = passed and sep.passed
    X = grid.points
    cols = [X] + [g.evaluate(X)[:, None] for g in gens]
    header = [f"x{j + 1}" for j in range(d)] + [f"h{k + 1}" for k in range(d + 1)]
    result = {"generators": items, "separates_points": sep.to_json()}
    return result, {"eps": eps, "midpoint_tol": tol, "n_pairs": n_pairs}, passed, \
        {"sg_check.csv": (header, np.hstack(cols))}


def cmd_borsuk(cfg, seed):
    K = _body(cfg)
    fs = [_expr(f) for f in cfg["functions"]]
    if len(fs) != K.dim or any(f.dim != K.dim for f in fs):
        raise InputError("functions", f"need {K.dim} functions of dimension {K.dim}")
    n_cap = cfg.get("n_cap", 1024)
    if K.dim == 2:
        tol = cfg.get("tol", 1e-7)
        cd = borsuk.find_common_direction_2d(fs[0], fs[1], K, tol=tol, n_cap=n_cap)
    else:
        tol = cfg.get("tol", 1e-4)
        try:
            cd = borsuk.find_common_direction_heuristic(fs, K, tol=tol, grid_size=cfg.get("grid_size", 200),
                                                        seed=seed, n_cap=n_cap)
        except NotConverged as exc:
            cd = exc.result
    result = cd.to_json()
    result["method"] = "bisection" if K.dim == 2 else "heuristic"
    header = ["n"] + [f"y{j + 1}" for j in range(K.dim)] + ["m", "residual"]
    rows = np.array([[t["n"]] + list(t["y"]) + [t["m"], t["residual"]] for t in cd.trace])
    return result, {"tol": tol, "n_cap": n_cap}, cd.success, {"borsuk_trace.csv": (header, rows)}


def cmd_counterexample(cfg, seed):
    K = _body(cfg)
    fs = [_expr(f) for f in cfg["functions"]]
    if len(fs) != K.dim or any(f.dim != K.dim for f in fs):
        raise InputError("functions", f"need {K.dim} functions of dimension {K.dim}")
    eps = float(cfg["eps"])
    tol = cfg.get("tol", 1e-7)
    rep = counterexample.theorem1b_demo(fs, K, eps, tol=tol, seed=seed, per_axis=cfg.get("per_axis", 41),
                                        n_members=cfg.get("n_members", 100), n_pairs=cfg.get("n_pairs", 500))
    tables = {}
    for k, (f, g) in enumerate(zip(fs, rep.g_reports)):
        rows = counterexample.chord_profile(f, g.g, rep.pinned)
        tables[f"counterexample_f{k + 1}.csv"] = (["t", "f", "g_eps"], np.array(rows))
    tols = {"eps": eps, "tol": tol, "plateau_tol": counterexample.PLATEAU_TOL,
            "sandwich_tol": counterexample.SANDWICH_TOL}
    return rep.to_json(), tols, rep.passed, tables


def cmd_convexity_test(cfg, seed):
    K = _body(cfg)
    f = _expr(cfg["function"])
    if f.dim != K.dim:
        raise InputError("function", f"function has dimension {f.dim}, body {K.dim}")
    tol = cfg.get("tol", 1e-9)
    n_pairs = cfg.get("n_pairs", 500)
    cert = midpoint_convexity_test(f, K, n_pairs=n_pairs, tol=tol, seed=seed, per_axis=cfg.get("per_axis", 3))
    return cert.to_json(), {"tol": tol, "n_pairs": n_pairs}, cert.passed, {}


def cmd_separates_points(cfg, seed):
    K = _body(cfg)
    gens = [_expr(g) for g in cfg["functions"]]
    if any(g.dim != K.dim for g in gens):
        raise InputError("functions", f"generators must have dimension {K.dim}")
    tol = cfg.get("tol", 1e-9)
    n_pairs = cfg.get("n_pairs", 500)
    cert = separates_points(gens, K, n_pairs=n_pairs, seed=seed, tol=tol)
    return cert.to_json(), {"tol": tol, "n_pairs": n_pairs}, cert.passed, {}


DISPATCH = {
    "approx": cmd_approx,
    "prop3": cmd_prop3,
    "sg-check": cmd_sg_check,
    "borsuk": cmd_borsuk,
    "counterexample": cmd_counterexample,
    "convexity-test": cmd_convexity_test,
    "separates-points": cmd_separates_points,
}


def run(config: dict, emit_csv=None):
    """Validate and execute ``config``; returns ``(exit_code, report)``."""
    validate(config)
    seed = int(config.get("seed", 0))
    report = {"schema": SCHEMA_VERSION, "command": config["command"], "config_digest": config_digest(config),
              "seed": seed}
    try:
        result, tols, passed, tables = DISPATCH[config["command"]](config, seed)
    except INPUT_ERRORS as exc:
        raise InputError(exc.clause, str(exc)) from None
    except ConvexAlgError as exc:
        report.update({"tolerances": {}, "result": None, "passed": False,
                       "failure": {"clause": exc.clause, "message": str(exc)}})
        return 2, _clean(report)
    report.update({"tolerances": tols, "result": result, "passed": bool(passed)})
    if not passed:
        report["failure"] = {"clause": _failing_clause(result), "message": "certificate failed"}
    if emit_csv:
        os.makedirs(emit_csv, exist_ok=True)
        for name, (header, rows) in tables.items():
            _write_csv(os.path.join(emit_csv, name), header, rows)
    return (0 if passed else 2), _clean(report)


def _failing_clause(result) -> str:
    if isinstance(result, dict):
        if result.get("verdict") == "fail":
            return result.get("kind", "certificate")
        for c in result.get("certificates", []) or []:
            if c.get("verdict") == "fail":
                return c.get("kind", "certificate")
    return "certificate"


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in np.atleast_2d(rows):
            w.writerow([repr(float(v)) for v in r])


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="convexalg", description="Shape-preserving approximation certificates.")
    ap.add_argument("--config", required=True, help="path to the JSON run config")
    ap.add_argument("--emit-csv", metavar="DIR", help="write CSV sample tables into DIR")
    ap.add_argument("--seed", type=int, help="override the config seed")
    ap.add_argument("--verbose", action="store_true", help="progress messages on standard error")
    args = ap.parse_args(argv)
    try:
        try:
            with open(args.config) as fh:
                config = json.load(fh)
        except OSError as exc:
            raise InputError("io", str(exc)) from None
        except json.JSONDecodeError as exc:
            raise InputError("json", str(exc)) from None
        if args.seed is not None:
            if args.seed < 0:
                raise InputError("seed", "seed must be nonnegative")
            if isinstance(config, dict):
                config["seed"] = args.seed
        if args.verbose:
            print(f"convexalg: running {config.get('command') if isinstance(config, dict) else '?'}",
                  file=sys.stderr)
        code, report = run(config, args.emit_csv)
    except InputError as exc:
        print(json.dumps({"error": exc.kind, "message": str(exc)}), file=sys.stderr)
        return 1
    text = dumps(report)
    out = config.get("output")
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.verbose:
        print(f"convexalg: exit {code}", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
