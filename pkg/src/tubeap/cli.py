"""Command-line front end: config ingestion, experiment orchestration, and
report emission.

JSON configs in, JSON or CSV out.  Exit codes: 0 all checks pass, 1 a
verification failed, 2 usage or config error, 3 inconclusive (budget or
noise).  Reports are byte-reproducible for a fixed seed: volatile metadata
(timestamp, thread count) goes to a sidecar file, never into the report.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
import time

import numpy as np

from .classify import (
    CaseParams,
    classify_spectrum,
    run_case_experiment,
    secular_convergence,
    theorem1_verify,
    theoremR_check,
)
from .cone import Cone, make_cone
from .errors import BudgetExhausted, ConfigError, TubeApError
from .expsum import ExpSum, fourier_coefficient
from .indicator import p_indicator_empirical, p_indicator_exact
from .jessen import QuadSpec, jessen_estimate, jessen_profile, secular_vector
from .zeros import Rect, count_zeros_rect, zero_density_strip

# Every analysis default, echoed into each report header.
DEFAULTS = {
    "S": 2000.0,
    "n_samples": 65536,
    "seed": 42,
    "clip": -40.0,
    "r_max": 50.0,
    "x_probes": 64,
    "R_schedule": [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
    "q": 5.0,
    "n_targets": 8,
    "ray_budget": 8,
    "t_list": [10.0, 20.0, 40.0],
    "mollifier_width": 0.3,
    "n_nodes": 16,
    "h_fd": 0.5,
    "x_span": 10000.0,
    "strip_halfwidth": 60.0,
    "coeff_S": 500.0,
    "coeff_grid": 4096,
}

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_INCONCLUSIVE = 3


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (np.complexfloating,)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    return obj


def _expect(cond, path, msg):
    if not cond:
        raise ConfigError(f"config error at {path}: {msg}")


def _load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config error at <file>: {path} not found")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config error at <file>: invalid JSON ({e})")
    _expect(isinstance(cfg, dict), "<root>", "must be a JSON object")
    return cfg


def _load_function(cfg):
    _expect("function" in cfg, "function", "missing")
    fn = cfg["function"]
    _expect(isinstance(fn, dict), "function", "must be an object")
    _expect("terms" in fn and isinstance(fn["terms"], list), "function.terms",
            "must be a list")
    _expect(len(fn["terms"]) > 0, "function.terms", "must be nonempty")
    for i, t in enumerate(fn["terms"]):
        _expect(isinstance(t, dict) and "lambda" in t, f"function.terms[{i}]",
                "needs a 'lambda' vector")
        _expect(isinstance(t["lambda"], list), f"function.terms[{i}].lambda",
                "must be a list of reals")
    try:
        return ExpSum.from_config(fn)
    except Exception as e:
        raise ConfigError(f"config error at function: {e}")


def _load_cone(cfg, f):
    if "cone" not in cfg or cfg["cone"] is None:
        return make_cone(np.eye(f.dimension))  # standard orthant
    cn = cfg["cone"]
    _expect(isinstance(cn, dict) and "generators" in cn, "cone.generators",
            "missing")
    try:
        return Cone.from_config(cn)
    except TubeApError as e:
        raise ConfigError(f"config error at cone.generators: {e}")


def _analysis(cfg, args):
    out = dict(DEFAULTS)
    user = cfg.get("analysis", {})
    _expect(isinstance(user, dict), "analysis", "must be an object")
    out.update(user)
    for key in ("S", "q", "r_max", "x_span", "mollifier_width", "h_fd"):
        if getattr(args, key.replace("-", "_"), None) is not None:
            out[key] = getattr(args, key)
    if args.n_samples is not None:
        out["n_samples"] = args.n_samples
    if args.seed is not None:
        out["seed"] = args.seed
    if args.R is not None:
        out["R_schedule"] = [float(v) for v in args.R.split(",")]
    if args.y is not None:
        out["y"] = [float(v) for v in args.y.split(",")]
    for key, cast in (("S", float), ("n_samples", int), ("seed", int), ("q", float)):
        try:
            out[key] = cast(out[key])
        except (TypeError, ValueError):
            raise ConfigError(f"config error at analysis.{key}: must be {cast.__name__}")
    _expect(out["S"] > 0, "analysis.S", "must be positive")
    _expect(out["n_samples"] >= 100, "analysis.n_samples", "must be >= 100")
    return out


def _quad(ana):
    return QuadSpec(
        S=float(ana["S"]),
        n_samples=int(ana["n_samples"]),
        seed=int(ana["seed"]),
        clip=float(ana["clip"]),
    )


def _get_y(ana, f, path="analysis.y"):
    _expect("y" in ana, path, "missing (pass --y or set analysis.y)")
    y = np.asarray(ana["y"], dtype=float)
    _expect(y.shape == (f.dimension,), path,
            f"needs {f.dimension} components")
    return y


def _emit(args, payload, csv_rows=None, csv_header=None):
    """Write the report; returns the serialized main output."""
    payload = _jsonable(payload)
    fmt = args.format
    if fmt == "csv":
        _expect(csv_rows is not None, "output.format",
                "this subcommand has no CSV form")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(csv_header)
        for row in csv_rows:
            w.writerow(row)
        text = buf.getvalue()
    else:
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
        sidecar = {
            "timestamp": time.time(),
            "threads": args.threads,
            "argv_output": args.output,
        }
        with open(args.output + ".meta.json", "w") as fh:
            json.dump(sidecar, fh, indent=2, sort_keys=True)
    else:
        sys.stdout.write(text)
    return text


def _report_payload(command, ana, results):
    return {
        "command": command,
        "defaults": DEFAULTS,
        "analysis": {k: _jsonable(v) for k, v in sorted(ana.items())},
        "results": results,
    }


# --------------------------------------------------------------------------
# subcommands


def _cmd_spectrum(args):
    cfg = _load_config(args.config)
    f = _load_function(cfg)
    ana = _analysis(cfg, args)
    y = np.asarray(ana.get("y", [0.0] * f.dimension), dtype=float)
    S = float(ana["coeff_S"])
    grid = int(ana["coeff_grid"]) if f.dimension == 1 else 256
    rows = []
    for lam, b in zip(f.frequencies, f.coefficients):
        est = fourier_coefficient(f, lam, y, S=S, grid_per_dim=grid)
        recovered = est.value * math.exp(float(np.dot(y, lam)))
        err = est.stderr * math.exp(float(np.dot(y, lam)))
        rows.append(
            {
                "lambda": lam.tolist(),
                "declared": b,
                "recovered": recovered,
                "stderr": err,
                "consistent": bool(abs(recovered - b) <= err + 1e-12),
            }
        )
    results = {
        "points": f.frequencies.tolist(),
        "limit_points": f.limit_frequencies.tolist(),
        "coefficients": rows,
    }
    _emit(args, _report_payload("spectrum", ana, results))
    return EXIT_PASS if all(r["consistent"] for r in rows) else EXIT_FAIL


def _cmd_jessen(args):
    cfg = _load_config(args.config)
    f = _load_function(cfg)
    ana = _analysis(cfg, args)
    y = _get_y(ana, f)
    quad = _quad(ana)
    if "R_schedule" in ana and args.R is not None:
        rows = []
        for R, est in jessen_profile(f, y, ana["R_schedule"], quad):
            rows.append(
                [R, est.value / R, est.stderr / R, est.S, est.n_samples,
                 est.clipped_fraction]
            )
        results = {"profile": [
            {"R": r[0], "J_over_R": r[1], "stderr": r[2]} for r in rows
        ]}
        _emit(args, _report_payload("jessen", ana, results), csv_rows=rows,
              csv_header=["R", "J_over_R", "stderr", "S", "n_samples",
                          "clipped_fraction"])
        return EXIT_PASS
    est = jessen_estimate(f, y, S=quad.S, n_samples=quad.n_samples,
                          seed=quad.seed, clip=quad.clip)
    row = list(y.tolist()) + [est.value, est.stderr, est.S, est.n_samples,
                              est.clipped_fraction]
    header = [f"y{k}" for k in range(f.dimension)] + [
        "value", "stderr", "S", "n_samples", "clipped_fraction"]
    results = {
        "y": y.tolist(),
        "value": est.value,
        "stderr": est.stderr,
        "clipped_fraction": est.clipped_fraction,
    }
    _emit(args, _report_payload("jessen", ana, results), csv_rows=[row],
          csv_header=header)
    return EXIT_PASS


def _cmd_secular(args):
    cfg = _load_config(args.config)
    f = _load_function(cfg)
    ana = _analysis(cfg, args)
    y = _get_y(ana, f)
    est = secular_vector(f, y, h=ana.get("h"), quad=_quad(ana))
    results = {
        "y": y.tolist(),
        "vector": est.vector.tolist(),
        "stderr": est.stderr.tolist(),
        "h": est.h,
    }
    _emit(args, _report_payload("secular", ana, results))
    return EXIT_PASS


def _cmd_indicator(args):
    cfg = _load_config(args.config)
    f = _load_function(cfg)
    ana = _analysis(cfg, args)
    y = _get_y(ana, f)
    est = p_indicator_empirical(f, y, r_max=float(ana["r_max"]),
                                x_probes=int(ana["x_probes"]),
                                seed=int(ana["seed"]))
    gap_bound = (math.log(float(np.sum(np.abs(f.coefficients)))) + math.log(2.0)) / est.r_max
    results = [{
        "y": y.tolist(),
        "exact": est.exact,
        "empirical": est.empirical,
        "r_max": est.r_max,
        "gap_bound": gap_bound,
    }]
    _emit(args, _report_payload("indicator", ana, results))
    return EXIT_PASS if abs(est.empirical - est.exact) <= gap_bound else EXIT_FAIL


def _cmd_zeros(args):
    cfg = _load_config(args.config)
    f = _load_function(cfg)
    _expect(f.dimension == 1, "function.dimension",
            "zero counting works on one-variable sums")
    ana = _analysis(cfg, args)
    if "rect" in ana:
        r = ana["rect"]
        for k in ("x_lo", "x_hi", "y_lo", "y_hi"):
            _expect(k in r, f"analysis.rect.{k}", "missing")
        res = count_zeros_rect(f, Rect(r["x_lo"], r["x_hi"], r["y_lo"], r["y_hi"]))
        results = {"count": res.count, "boundary_margin": res.boundary_margin,
                   "rect": r}
        _emit(args, _report_payload("zeros", ana, results))
        return EXIT_PASS
    _expect("y1" in ana and "y2" in ana, "analysis.y1",
            "strip mode needs analysis.y1 and analysis.y2")
    res = zero_density_strip(f, float(ana["y1"]), float(ana["y2"]),
                             S=float(ana["S"]), mm_span=float(ana["x_span"]))
    results = {
        "density": res.density,
        "count": res.count,
        "secular_companion": res.secular_companion,
        "mean_motion_lo": res.mean_motion_lo,
        "mean_motion_hi": res.mean_motion_hi,
    }
    rows = [[res.y1, res.y2, res.S, res.count, res.density, res.secular_companion]]
    _emit(args, _report_payload("zeros", ana, results), csv_rows=rows,
          csv_header=["y1", "y2", "S", "count", "density", "secular_companion"])
    return EXIT_PASS


def _cmd_classify(args):
    cfg = _load_config(args.config)
    f = _load_function(cfg)
    cone = _load_cone(cfg, f)
    ana = _analysis(cfg, args)
    label = classify_spectrum(f.spectrum(), cone)
    results = {
        "case_id": label.case_id,
        "shift": None if label.shift is None else label.shift.tolist(),
        "notes": label.notes,
    }
    _emit(args, _report_payload("classify", ana, results))
    sys.stderr.write(f"case {label.case_id}\n")
    if label.notes:
        sys.stderr.write(f"shift search: {label.notes}\n")
    return EXIT_PASS


def _verification_exit(reports):
    if any(r.inconclusive for r in reports):
        return EXIT_INCONCLUSIVE if all(r.passed for r in reports) else EXIT_FAIL
    return EXIT_PASS if all(r.passed for r in reports) else EXIT_FAIL


def _cmd_verify_t1(args):
    cfg = _load_config(args.config)
    f = _load_function(cfg)
    cone = _load_cone(cfg, f)
    ana = _analysis(cfg, args)
    y = _get_y(ana, f)
    rep = theorem1_verify(f, cone, y, ana["R_schedule"], quad=_quad(ana))
    rows = [[t["R"], t["J_over_R"], t["h"], t["gap"], t["stderr"]]
            for t in rep.trace]
    _emit(args, _report_payload("verify-t1", ana, rep.to_json()),
          csv_rows=rows, csv_header=["R", "J_over_R", "h", "gap", "stderr"])
    sys.stderr.write(rep.to_table() + "\n")
    return _verification_exit([rep])


def _cmd_verify_secular(args):
    cfg = _load_config(args.config)
    f = _load_function(cfg)
    cone = _load_cone(cfg, f)
    ana = _analysis(cfg, args)
    _expect("base_points" in ana, "analysis.base_points", "missing")
    rep = secular_convergence(
        f, cone, ana["base_points"], ana["R_schedule"],
        mollifier_width=float(ana["mollifier_width"]),
        n_nodes=int(ana["n_nodes"]), h_fd=float(ana["h_fd"]),
        quad=_quad(ana), seed=int(ana["seed"]),
    )
    _emit(args, _report_payload("verify-secular", ana, rep.to_json()))
    sys.stderr.write(rep.to_table() + "\n")
    return _verification_exit([rep])


def _cmd_verify_tR(args):
    cfg = _load_config(args.config)
    f = _load_function(cfg)
    ana = _analysis(cfg, args)
    _expect("y1" in ana and "y2" in ana, "analysis.y1",
            "segment needs analysis.y1 and analysis.y2 vectors")
    y1 = np.atleast_1d(np.asarray(ana["y1"], dtype=float))
    y2 = np.atleast_1d(np.asarray(ana["y2"], dtype=float))
    rep = theoremR_check(f, y1, y2, quad=_quad(ana),
                         strip_halfwidth=float(ana["strip_halfwidth"]))
    _emit(args, _report_payload("verify-tR", ana, rep.to_json()))
    sys.stderr.write(rep.to_table() + "\n")
    return _verification_exit([rep])


def _cmd_picard(args):
    cfg = _load_config(args.config)
    f = _load_function(cfg)
    cone = _load_cone(cfg, f)
    ana = _analysis(cfg, args)
    label = classify_spectrum(f.spectrum(), cone)
    params = CaseParams(
        q=float(ana["q"]), n_targets=int(ana["n_targets"]),
        t_list=tuple(ana["t_list"]), x_probes=int(ana["x_probes"]),
        seed=int(ana["seed"]), ray_budget=int(ana["ray_budget"]),
    )
    rep = run_case_experiment(f, cone, label, params)
    payload = _report_payload("picard", ana, {
        "label": {"case_id": label.case_id,
                  "shift": None if label.shift is None else label.shift.tolist()},
        "experiment": rep.to_json(),
    })
    _emit(args, payload)
    sys.stderr.write(rep.to_table() + "\n")
    return _verification_exit([rep])


def _cmd_report(args):
    cfg = _load_config(args.config)
    f = _load_function(cfg)
    cone = _load_cone(cfg, f)
    ana = _analysis(cfg, args)
    label = classify_spectrum(f.spectrum(), cone)
    reports = []
    results = {
        "classify": {
            "case_id": label.case_id,
            "shift": None if label.shift is None else label.shift.tolist(),
            "notes": label.notes,
        }
    }
    if "y" in ana:
        y = _get_y(ana, f)
        rep_t1 = theorem1_verify(f, cone, y, ana["R_schedule"], quad=_quad(ana))
        reports.append(rep_t1)
        results["verify_t1"] = rep_t1.to_json()
        ind = p_indicator_empirical(f, y, r_max=float(ana["r_max"]),
                                    x_probes=int(ana["x_probes"]),
                                    seed=int(ana["seed"]))
        results["indicator"] = {"y": y.tolist(), "exact": ind.exact,
                                "empirical": ind.empirical, "r_max": ind.r_max}
    params = CaseParams(
        q=float(ana["q"]), n_targets=int(ana["n_targets"]),
        t_list=tuple(ana["t_list"]), x_probes=int(ana["x_probes"]),
        seed=int(ana["seed"]), ray_budget=int(ana["ray_budget"]),
    )
    rep_case = run_case_experiment(f, cone, label, params)
    reports.append(rep_case)
    results["experiment"] = rep_case.to_json()
    _emit(args, _report_payload("report", ana, results))
    for r in reports:
        sys.stderr.write(r.to_table() + "\n")
    return _verification_exit(reports)


COMMANDS = {
    "spectrum": _cmd_spectrum,
    "jessen": _cmd_jessen,
    "secular": _cmd_secular,
    "indicator": _cmd_indicator,
    "zeros": _cmd_zeros,
    "classify": _cmd_classify,
    "verify-t1": _cmd_verify_t1,
    "verify-secular": _cmd_verify_secular,
    "verify-tR": _cmd_verify_tR,
    "picard": _cmd_picard,
    "report": _cmd_report,
}


def _add_common(sub):
    sub.add_argument("--config", required=True, help="JSON run configuration")
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--threads", type=int,
                     default=int(os.environ.get("TUBEAP_THREADS", "0")) or None,
                     help="advisory; results are thread-count independent")
    sub.add_argument("--output", default=None, help="write the report here")
    sub.add_argument("--format", choices=("json", "csv"), default="json")
    sub.add_argument("--y", default=None, help="comma-separated height vector")
    sub.add_argument("--R", default=None, help="comma-separated R schedule")
    sub.add_argument("--S", type=float, default=None)
    sub.add_argument("--n-samples", dest="n_samples", type=int, default=None)
    sub.add_argument("--q", type=float, default=None)
    sub.add_argument("--r-max", dest="r_max", type=float, default=None)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="tubeap",
        description="Invariants of almost periodic exponential sums on tube "
                    "domains over convex cones",
    )
    subs = parser.add_subparsers(dest="command")
    for name in COMMANDS:
        _add_common(subs.add_parser(name))
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        sys.stderr.write(str(e) + "\n")
        return EXIT_CONFIG
    except BudgetExhausted as e:
        sys.stderr.write(f"inconclusive: {e}\n")
        return EXIT_INCONCLUSIVE
    except TubeApError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
