"""Command line driver: JSON config in, deterministic artifacts out.

Each invocation reads one config file, runs a single command, writes a JSON
report plus a CSV table under the output directory, and signals success only
through the exit code: 0 pass or informational, 2 invalid config, 3 numerical
failure.  Identical (config, seed) pairs produce identical bytes; all floats
are printed with 12 significant digits and files are written atomically.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import tempfile

import jsonschema

from .algebra import make_rng, random_positive
from .certify import (DEFAULT_T_GRID, OptimizerBudget, decay_check,
                      estimate_constant, pnorm_decay_check)
from .doi import cone_test, log_difference, power_difference
from .entropy import entropy_vs_subalgebra
from .errors import ContractViolationError, DegenerateStateError, DomainError
from .functions import function_from_spec
from .models import ampliate_generator, model_from_spec, semigroup_apply
from .suite import (CHECKS, _model_label, check_dpi, reports_to_csv,
                    suite_run, suite_verdict)

_MODEL = {"type": "object"}
_F = {"type": "object", "required": ["tag"], "additionalProperties": False,
      "properties": {"tag": {"type": "string"}, "p": {"type": "number"}}}
_BUDGET = {"type": "object", "additionalProperties": False,
           "properties": {"restarts": {"type": "integer", "minimum": 1},
                          "iterations": {"type": "integer", "minimum": 1}}}
_T_GRID = {"type": "array", "minItems": 1, "items": {"type": "number"}}
_COMMON = {"command": {"type": "string"}, "seed": {"type": "integer"},
           "out": {"type": "string"}}

SCHEMAS = {
    "gap": {
        "type": "object", "additionalProperties": False,
        "required": ["command", "model"],
        "properties": dict(_COMMON, model=_MODEL),
    },
    "estimate": {
        "type": "object", "additionalProperties": False,
        "required": ["command", "model", "f"],
        "properties": dict(_COMMON, model=_MODEL, f=_F, budget=_BUDGET,
                           ampliation={"type": "integer", "minimum": 1}),
    },
    "decay": {
        "type": "object", "additionalProperties": False,
        "required": ["command", "model", "f", "lambda"],
        "properties": dict(
            _COMMON, model=_MODEL, f=_F,
            ampliation={"type": "integer", "minimum": 1},
            n_states={"type": "integer", "minimum": 1},
            t_grid=_T_GRID,
            **{"lambda": {"type": "number", "exclusiveMinimum": 0}}),
    },
    "pnorm": {
        "type": "object", "additionalProperties": False,
        "required": ["command", "model", "p", "lambda"],
        "properties": dict(
            _COMMON, model=_MODEL,
            p={"type": "number", "exclusiveMinimum": 1, "exclusiveMaximum": 2},
            n_states={"type": "integer", "minimum": 1},
            t_grid=_T_GRID,
            **{"lambda": {"type": "number", "exclusiveMinimum": 0}}),
    },
    "cone-test": {
        "type": "object", "additionalProperties": False,
        "required": ["command", "kernel"],
        "properties": dict(
            _COMMON,
            kernel={"type": "object", "required": ["tag"],
                    "additionalProperties": False,
                    "properties": {"tag": {"enum": ["log", "power"]},
                                   "p": {"type": "number"}}},
            side={"enum": ["plus", "minus"]},
            trials={"type": "integer", "minimum": 1},
            dims={"type": "array", "items": {"type": "integer", "minimum": 2}},
            env_dims={"type": "array",
                      "items": {"type": "integer", "minimum": 1}}),
    },
    "dpi-test": {
        "type": "object", "additionalProperties": False,
        "required": ["command"],
        "properties": dict(_COMMON, trials={"type": "integer", "minimum": 1}),
    },
    "suite": {
        "type": "object", "additionalProperties": False,
        "required": ["command"],
        "properties": dict(
            _COMMON,
            checks={"type": "array",
                    "items": {"anyOf": [
                        {"type": "string"},
                        {"type": "object", "required": ["id"],
                         "properties": {"id": {"type": "string"}}}]}}),
    },
}


def _round12(obj):
    if isinstance(obj, float):
        return float(f"{obj:.12g}") if math.isfinite(obj) else obj
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    return obj


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path, payload):
    _atomic_write(path, json.dumps(_round12(payload), indent=2,
                                   sort_keys=True) + "\n")


def _csv_text(rows):
    import io
    buf = io.StringIO()
    writer = csv.writer(buf)
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


_CSV_HEADER = ["check_id", "model", "f", "p", "k", "seed",
               "value", "slack", "verdict"]


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def emit_decay_curve(A, f, rho, t_grid, path, lam):
    """CSV (t, entropy, bound_e_minus_lambda_t): entropy along the semigroup
    against the exponential bound started from the t=0 value."""
    E = A.expectation
    d0 = entropy_vs_subalgebra(f, rho, E).value
    rows = [["t", "entropy", "bound_e_minus_lambda_t"]]
    for t in t_grid:
        t = float(t)
        sigma = semigroup_apply(A, t, rho).hermitian_part()
        d_t = entropy_vs_subalgebra(f, sigma, E).value
        rows.append([_fmt(t), _fmt(d_t), _fmt(d0 * math.exp(-lam * t))])
    _atomic_write(path, _csv_text(rows))
    return path


def _build_model(config):
    A = model_from_spec(config["model"])
    k = int(config.get("ampliation", 1))
    if k > 1:
        A = ampliate_generator(A, k)
    return A


def _states(A, n, seed, floor=1e-3):
    return [random_positive(A.algebra, floor=floor, seed=make_rng(seed, 3, i))
            for i in range(n)]


def _report_artifacts(out, stem, report, extra=None):
    payload = dict(report.to_json())
    if extra:
        payload.update(extra)
    _write_json(os.path.join(out, f"{stem}.json"), payload)
    reports_to_csv([report], os.path.join(out, f"{stem}.csv"))
    return payload


def _run_gap(config, out, seed, quiet):
    A = model_from_spec(config["model"])
    g = A.gap()
    exact = A.exact_gap
    verdict = "pass"
    slack = None
    if exact is not None:
        slack = -abs(g - float(exact))
        verdict = "pass" if abs(g - float(exact)) <= 1e-9 else "fail"
    _write_json(os.path.join(out, "gap.json"),
                {"command": "gap", "model": A.spec, "gap": g,
                 "exact": exact, "verdict": verdict, "seed": seed})
    rows = [_CSV_HEADER,
            ["gap", _model_label(A.spec), "", "", "",
             _fmt(seed), _fmt(g), _fmt(slack), verdict]]
    _atomic_write(os.path.join(out, "gap.csv"), _csv_text(rows))
    if not quiet:
        print(f"{g:.9f}")
    return 0 if verdict == "pass" else 3


def _run_estimate(config, out, seed, quiet):
    f = function_from_spec(config["f"])
    budget_cfg = config.get("budget", {})
    budget = OptimizerBudget(
        restarts=int(budget_cfg.get("restarts", 32)),
        iterations=int(budget_cfg.get("iterations", 2000)),
        seed=seed)
    base = model_from_spec(config["model"])
    res = estimate_constant(base, f, ampliation=int(config.get("ampliation", 1)),
                            budget=budget)
    est = res.estimated_lambda
    verdict = "informational"
    if res.bracket is not None:
        low, high = res.bracket
        verdict = ("pass" if low - 1e-6 <= est <= high + 1e-6 else "fail")
    payload = dict(res.to_json(), command="estimate", verdict=verdict)
    _write_json(os.path.join(out, "estimate.json"), payload)
    f_spec = f.to_spec()
    rows = [_CSV_HEADER]
    for i, val in enumerate(res.restart_values):
        rows.append(["estimate", _model_label(res.model),
                     f_spec["tag"], _fmt(f_spec.get("p")), _fmt(res.ampliation),
                     _fmt(i), _fmt(val), _fmt(val - est), verdict])
    _atomic_write(os.path.join(out, "estimate.csv"), _csv_text(rows))
    if not quiet:
        print(f"estimate {est:.12g} verdict {verdict}")
    return 0 if verdict in ("pass", "informational") else 3


def _run_decay(config, out, seed, quiet):
    A = _build_model(config)
    f = function_from_spec(config["f"])
    lam = float(config["lambda"])
    t_grid = tuple(float(t) for t in config.get("t_grid") or ()) or None
    states = _states(A, int(config.get("n_states", 20)), seed)
    report = decay_check(A, f, lam, states, t_grid=t_grid)
    _report_artifacts(out, "decay", report,
                      {"command": "decay", "model": A.spec, "seed": seed})
    emit_decay_curve(A, f, states[0], t_grid or DEFAULT_T_GRID,
                     os.path.join(out, "decay_curve.csv"), lam)
    if not quiet:
        print(f"decay verdict {report.verdict}")
    return 0 if report.verdict == "pass" else 3


def _run_pnorm(config, out, seed, quiet):
    A = _build_model(config)
    p = float(config["p"])
    lam = float(config["lambda"])
    t_grid = tuple(float(t) for t in config.get("t_grid") or ()) or None
    states = _states(A, int(config.get("n_states", 20)), seed)
    report = pnorm_decay_check(A, p, lam, states, t_grid=t_grid)
    _report_artifacts(out, "pnorm", report,
                      {"command": "pnorm", "model": A.spec, "seed": seed})
    if not quiet:
        print(f"pnorm verdict {report.verdict}")
    return 0 if report.verdict == "pass" else 3


def _run_cone_test(config, out, seed, quiet):
    spec = config["kernel"]
    if spec["tag"] == "log":
        F = log_difference()
    else:
        F = power_difference(float(spec.get("p", 0.5)))
    kwargs = {"side": config.get("side", "plus"),
              "trials": int(config.get("trials", 100)), "seed": seed}
    if "dims" in config:
        kwargs["dims"] = tuple(int(d) for d in config["dims"])
    if "env_dims" in config:
        kwargs["env_dims"] = tuple(int(d) for d in config["env_dims"])
    rep = cone_test(F, **kwargs)
    _write_json(os.path.join(out, "cone_test.json"),
                dict(rep.to_json(), command="cone-test"))
    rows = [_CSV_HEADER,
            ["cone_membership", "", rep.kernel, _fmt(spec.get("p")), "",
             _fmt(seed), _fmt(rep.worst_min_eig), _fmt(rep.worst_margin),
             rep.verdict]]
    for v in rep.violations:
        rows.append(["cone_membership", "", rep.kernel, _fmt(spec.get("p")),
                     _fmt(v["dim"]), _fmt(v["seed"]), _fmt(v["min_eig"]),
                     _fmt(v["min_eig"] + v["tolerance"]), rep.verdict])
    _atomic_write(os.path.join(out, "cone_test.csv"), _csv_text(rows))
    if not quiet:
        print(f"cone-test verdict {rep.verdict}")
    return 0 if rep.verdict == "pass" else 3


def _run_dpi_test(config, out, seed, quiet):
    report = check_dpi(seed=seed, trials=int(config.get("trials", 40)))
    _report_artifacts(out, "dpi_test", report,
                      {"command": "dpi-test", "seed": seed})
    if not quiet:
        print(f"dpi-test verdict {report.verdict}")
    return 0 if report.verdict == "pass" else 3


def _run_suite(config, out, seed, quiet, check_filter=None):
    suite_cfg = {"seed": seed}
    checks = config.get("checks")
    if checks is not None:
        suite_cfg["checks"] = checks
    if check_filter is not None:
        entries = suite_cfg.get("checks", list(CHECKS))
        keep = []
        for entry in entries:
            cid = entry if isinstance(entry, str) else entry.get("id")
            if cid == check_filter:
                keep.append(entry)
        suite_cfg["checks"] = keep
    reports = suite_run(suite_cfg)
    verdict = suite_verdict(reports)
    _write_json(os.path.join(out, "suite.json"),
                {"command": "suite", "seed": seed, "verdict": verdict,
                 "reports": [rep.to_json() for rep in reports]})
    reports_to_csv(reports, os.path.join(out, "suite.csv"))
    if not quiet:
        for rep in reports:
            tag = " (informational)" if rep.informational else ""
            print(f"{rep.check_id}: {rep.verdict}{tag}")
        print(f"suite verdict {verdict}")
    return 0 if verdict == "pass" else 3


_RUNNERS = {
    "gap": _run_gap,
    "estimate": _run_estimate,
    "decay": _run_decay,
    "pnorm": _run_pnorm,
    "cone-test": _run_cone_test,
    "dpi-test": _run_dpi_test,
    "suite": _run_suite,
}


def validate_config(config):
    """Schema-check a config dict and return its command name."""
    if not isinstance(config, dict):
        raise jsonschema.ValidationError("config must be a JSON object")
    command = config.get("command")
    if command not in SCHEMAS:
        raise jsonschema.ValidationError(
            f"unknown command {command!r}; expected one of {sorted(SCHEMAS)}")
    jsonschema.validate(config, SCHEMAS[command])
    return command


def run(config, out_dir=None, seed=None, check_filter=None, quiet=False):
    """Execute one validated config; returns the process exit code."""
    try:
        command = validate_config(config)
    except jsonschema.ValidationError as exc:
        print(f"invalid config: {exc.message}", file=sys.stderr)
        return 2
    out = out_dir or config.get("out") or "."
    run_seed = int(seed if seed is not None else config.get("seed", 0))
    try:
        if command == "suite":
            return _run_suite(config, out, run_seed, quiet,
                              check_filter=check_filter)
        return _RUNNERS[command](config, out, run_seed, quiet)
    except ContractViolationError as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        return 2
    except (DegenerateStateError, DomainError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="sobolev-lab",
        description="Estimate decay constants and verify entropy inequalities "
                    "for tracial block-matrix models.",
        epilog="Set SOBOLEV_LAB_THREADS to cap the optimizer worker count.")
    parser.add_argument("--config", required=True,
                        help="path to a JSON experiment config")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--out", default=None,
                        help="artifact directory (default: config 'out' or .)")
    parser.add_argument("--check", default=None,
                        help="run only this check id (suite command)")
    parser.add_argument("--quiet", action="store_true",
                        help="suppress progress prints")
    args = parser.parse_args(argv)
    try:
        with open(args.config) as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 2
    return run(config, out_dir=args.out, seed=args.seed,
               check_filter=args.check, quiet=args.quiet)


if __name__ == "__main__":
    sys.exit(main())
