"""Command-line front end: ``congcount <command> --config run.json --out dir``.

Every command writes ``<command>.json`` (validated against the shipped
output schema) and one or more CSV tables into the output directory, and
prints a one-line summary.  Exit codes: 0 ok, 1 domain, 2 config, 3 resource.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from importlib import resources

import jsonschema
import numpy as np

from .arithmetic import parse_ring_element
from .congruence import (
    DEFAULT_GROUP_CAP,
    cycle_control,
    expander_report,
    trace_field_witness,
    zariski_density_probe,
)
from .counting import (
    DEFAULT_BUDGET,
    TestFunction,
    ball_count,
    equidistribution_report,
    exponent_fit,
    zaremba_density,
    zaremba_sets,
)
from .dynamics import lnic_probe
from .errors import CongCountError, ConfigError, DomainError, ResourceError
from .semigroup import spec_from_json, validate_ping_pong
from .suites import run_all
from .thermo import bowen_delta

COMMANDS = ("validate", "delta", "count", "spectral", "expander", "zaremba", "verify", "probe-lnic")
RANDOMIZED = ("spectral", "verify", "probe-lnic")
SIG = 12


# ---------------------------------------------------------------- formatting

def _num(x):
    """Floats rounded to 12 significant digits; ints, strings and None untouched."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return None
        return float(f"{x:.{SIG}g}")
    if isinstance(x, complex):
        return [_num(x.real), _num(x.imag)]
    if isinstance(x, dict):
        return {str(k): _num(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_num(v) for v in x]
    return x if x is None or isinstance(x, str) else str(x)


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.{SIG}g}"
    if isinstance(x, (list, tuple)):
        return " ".join(_cell(v) for v in x)
    return str(x)


def write_csv(path: str, header: list, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def _schema(name: str) -> dict:
    return json.loads(resources.files("congcount").joinpath("schemas", name).read_text("utf-8"))


# ---------------------------------------------------------------- config

def load_config(path: str | None) -> dict:
    if path is None:
        cfg = {"schema_version": 1}
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON in {path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        jsonschema.validate(cfg, _schema("config.schema.json"))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config does not match the schema at {where}: {exc.message}") from None
    if "spec_path" in cfg:
        if "spec" in cfg:
            raise ConfigError("give either 'spec' or 'spec_path', not both")
        base = os.path.dirname(os.path.abspath(path)) if path else os.getcwd()
        sp = os.path.join(base, cfg["spec_path"])
        try:
            with open(sp, encoding="utf-8") as fh:
                cfg["spec"] = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read spec: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON in {sp}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        try:
            jsonschema.validate(cfg["spec"], _schema("config.schema.json")["$defs"]["spec"])
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"spec does not match the schema: {exc.message}") from None
        del cfg["spec_path"]
    return cfg


def _need_spec(cfg):
    if "spec" not in cfg:
        raise ConfigError("this command needs a 'spec' or 'spec_path' entry")
    return spec_from_json(cfg["spec"])


def _ring_list(values):
    return [parse_ring_element(v) for v in values]


# ---------------------------------------------------------------- commands

def cmd_validate(cfg, out):
    spec = _need_spec(cfg)
    report = validate_ping_pong(spec)
    res = {"ok": report["ok"], "violations": report["violations"], "kind": spec.kind, "N": spec.N}
    if spec.kind == "cf":
        res["epsilon"] = spec.epsilon
    rows = [("ping_pong", report["ok"], "")] + [("ping_pong", False, v) for v in report["violations"]]
    write_csv(os.path.join(out, "validate.csv"), ["check", "ok", "detail"], rows)
    status = "ok" if report["ok"] else "failed"
    summary = "valid" if report["ok"] else "invalid: " + "; ".join(report["violations"])
    return res, status, [], summary


def cmd_delta(cfg, out):
    spec = _need_spec(cfg)
    c = cfg.get("delta", {})
    r = bowen_delta(spec, tol=c.get("tol", 1e-8), depth=c.get("depth"))
    rows = [(k, r[k]) for k in ("delta", "delta_depth", "delta_coarse", "error", "contraction")]
    rows += [("depth_coarse", r["depths"][0]), ("depth", r["depths"][1])]
    write_csv(os.path.join(out, "delta.csv"), ["quantity", "value"], rows)
    return r, "ok", [], f"delta = {r['delta']:.{SIG}g} +- {r['error']:.3g}"


def _test_function(c) -> TestFunction | None:
    tf = c.get("test_function")
    if tf is None:
        return None
    entries = tuple((tuple(e["word"]), float(e["value"])) for e in tf.get("entries", []))
    return TestFunction(entries, float(tf.get("default", 1.0)))


def cmd_count(cfg, out):
    spec = _need_spec(cfg)
    c = cfg.get("count", {})
    q = parse_ring_element(c.get("q", 1))
    warnings = []
    try:
        ledger = ball_count(spec, q, gamma0=c.get("gamma0", ()), radii=c.get("radii"),
                            F=_test_function(c), budget=cfg.get("budget", DEFAULT_BUDGET),
                            R0=c.get("R0", 10), checkpoints=c.get("checkpoints", 10),
                            cap=cfg.get("group_cap", DEFAULT_GROUP_CAP))
    except ResourceError as exc:
        if exc.partial is None:
            raise
        ledger = exc.partial
        warnings.append(f"{exc}; counts are partial (lower bounds)")
    res = {"ledger": ledger.to_json(), "fit": None}
    if ledger.partial:
        warnings.append("no exponent fit on a partial ledger")
    else:
        try:
            res["fit"] = exponent_fit(ledger)
        except DomainError as exc:
            warnings.append(f"no exponent fit: {exc}")
    try:
        res["equidistribution"] = equidistribution_report(ledger)
    except DomainError:
        res["equidistribution"] = None
    eq = res["equidistribution"]
    tv = eq["tv_attained"] if eq else [None] * len(ledger.radii)
    write_csv(os.path.join(out, "count.csv"), ["R", "total", "attained_classes", "tv_attained"],
              [(R, int(t), ledger.attained(j), tv[j])
               for j, (R, t) in enumerate(zip(ledger.radii, ledger.totals))])
    write_csv(os.path.join(out, "count_classes.csv"), ["R", "class", "count", "weighted"], ledger.rows())
    status = "partial" if ledger.partial else "ok"
    slope = res["fit"]["slope"] if res["fit"] else float("nan")
    summary = f"{int(ledger.totals[-1])} elements up to R = {ledger.radii[-1]:.{SIG}g}, slope {slope:.6g}"
    if ledger.partial:
        summary += " (partial)"
    return res, status, warnings, summary


def cmd_spectral(cfg, out, seed):
    from .thermo import congruence_decay_probe

    spec = _need_spec(cfg)
    c = cfg.get("spectral", {})
    xi = c.get("xi", [0.0, 0.0])
    results, rows = [], []
    for q in _ring_list(c.get("q", [2, 3, 5])):
        r = congruence_decay_probe(spec, q, xi=complex(xi[0], xi[1]), k_max=c.get("k_max", 20),
                                   trials=c.get("trials", 4), seed=seed, depth=c.get("depth"),
                                   cap=cfg.get("group_cap", DEFAULT_GROUP_CAP))
        results.append(r)
        rows += [(str(q), k, v, cv) for k, (v, cv) in enumerate(zip(r["norms"], r["control_norms"]))]
    write_csv(os.path.join(out, "spectral.csv"), ["q", "k", "norm", "control_norm"], rows)
    ok = all(r["eta"] is not None and r["eta"] > 0 for r in results)
    etas = ", ".join(f"q={r['q']}: {r['eta'] if r['eta'] is None else format(r['eta'], '.4g')}"
                     for r in results)
    return {"probes": results}, "ok" if ok else "failed", [], f"decay rates {etas}"


def cmd_expander(cfg, out):
    spec = _need_spec(cfg)
    c = cfg.get("expander", {})
    y, z = c.get("y", 0), c.get("z", 0)
    gaps = []
    for q in _ring_list(c.get("q", [2, 3, 5, 7])):
        for p in c.get("p", [1, 2]):
            gaps.append(expander_report(spec, q, p, y, z, cap=cfg.get("group_cap", DEFAULT_GROUP_CAP)))
    cycles = [cycle_control(n) for n in c.get("cycle_n", [5, 8, 13])]
    zariski = [zariski_density_probe(spec, p, y, z) for p in c.get("p", [1, 2])]
    warnings, witness = [], None
    if spec.kind == "cf" and not spec.real:
        for p in sorted(c.get("p", [1, 2]), reverse=True):
            try:
                w = trace_field_witness(spec, p, y, z)
            except DomainError as exc:
                warnings.append(str(exc))
                continue
            witness = {"p": p, "trace": str(w["trace"]), "case": w["case"], "words": _num(w["words"])}
            break
    write_csv(os.path.join(out, "expander.csv"),
              ["q", "p", "set_size", "group_size", "lambda2", "full_group_lambda2"],
              [(g["q"], g["p"], g["set_size"], g["group_size"], g["lambda2"], g["full_group_lambda2"])
               for g in gaps])
    write_csv(os.path.join(out, "expander_cycles.csv"), ["n", "lambda2", "expected"],
              [(r["n"], r["lambda2"], r["expected"]) for r in cycles])
    ok = all(g["lambda2"] > 1e-10 for g in gaps)
    low = min(g["lambda2"] for g in gaps)
    res = {"gaps": gaps, "cycle_controls": cycles, "zariski": zariski, "trace_witness": witness}
    return res, "ok" if ok else "failed", warnings, f"min lambda2 = {low:.6g} over {len(gaps)} graphs"


def cmd_zaremba(cfg, out):
    c = cfg.get("zaremba", {})
    if "alphabet" in c:
        alph = c["alphabet"]
    elif "spec" in cfg and cfg["spec"].get("setting") == "cf":
        alph = [parse_ring_element(a) for a in cfg["spec"]["alphabet"]]
    else:
        alph = [1, 2, 3, 4, 5]
    Ns = c.get("N", [1000, 10000])
    rows, dens = [], []
    for N in Ns:
        _, ds = zaremba_sets(alph, N, fractions=False)
        d = zaremba_density(alph, N)
        dens.append({"N": N, "denominators": len(ds), "density": float(d), "density_exact": str(d)})
        rows.append((N, len(ds), float(d)))
    _, ds = zaremba_sets(alph, max(Ns), fractions=False)
    write_csv(os.path.join(out, "zaremba.csv"), ["N", "denominators", "density"], rows)
    write_csv(os.path.join(out, "zaremba_denominators.csv"), ["d"], ((d,) for d in sorted(ds)))
    res = {"alphabet": [str(a) for a in alph], "densities": dens}
    return res, "ok", [], ", ".join(f"density({r['N']}) = {r['density']:.6g}" for r in dens)


def cmd_verify(cfg, out, seed):
    spec = _need_spec(cfg)
    c = cfg.get("verify", {})
    qs = tuple(_ring_list(c.get("q", [2, 3])))
    suites = run_all(spec, seed=seed, periodic_max_length=c.get("periodic_max_length"),
                     renewal_instances=c.get("renewal_instances"), qs=qs)
    rows = []
    for s in suites:
        metric = next((k for k in ("max_deviation", "max_discrepancy", "violations", "mismatches") if k in s), None)
        val = s.get(metric) if metric else None
        rows.append((s["name"], s["ok"], metric or "", len(val) if isinstance(val, list) else val,
                     s.get("skipped", "")))
    write_csv(os.path.join(out, "verify.csv"), ["suite", "ok", "metric", "value", "note"], rows)
    ok = all(s["ok"] for s in suites)
    passed = sum(bool(s["ok"]) for s in suites)
    return {"suites": suites}, "ok" if ok else "failed", [], f"{passed}/{len(suites)} identity suites pass"


def cmd_probe_lnic(cfg, out, seed):
    spec = _need_spec(cfg)
    c = cfg.get("lnic", {})
    probes = []
    for m in c.get("m", [1, 2]):
        r = lnic_probe(spec, m, sample_count=c.get("samples", 200), seed=seed, max_pairs=c.get("max_pairs"))
        probes.append({"m": m, "pair": [list(r["pair"][0]), list(r["pair"][1])],
                       "delta0": r["delta0"], "pairs_tested": r["pairs_tested"]})
    write_csv(os.path.join(out, "lnic.csv"), ["m", "section_a", "section_b", "delta0", "pairs_tested"],
              [(p["m"], p["pair"][0], p["pair"][1], p["delta0"], p["pairs_tested"]) for p in probes])
    best = max(p["delta0"] for p in probes)
    return {"probes": probes}, "ok" if best > 0 else "failed", [], f"best delta0 = {best:.6g}"


HANDLERS = {
    "validate": cmd_validate, "delta": cmd_delta, "count": cmd_count, "spectral": cmd_spectral,
    "expander": cmd_expander, "zaremba": cmd_zaremba, "verify": cmd_verify, "probe-lnic": cmd_probe_lnic,
}


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="congcount", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="run configuration (JSON)")
        p.add_argument("--out", help="output directory (default: config 'out', else ./out)")
        p.add_argument("--seed", type=int, help="seed for randomized probes (overrides config)")
        p.add_argument("--threads", type=int, help="parallelism cap; results do not depend on it")
        p.add_argument("--budget", type=int, help="enumeration budget for count (overrides config)")
    return ap


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cmd = args.command
    try:
        cfg = load_config(args.config)
        for key in ("seed", "budget", "threads"):
            v = getattr(args, key)
            if v is not None:
                if v < (0 if key == "seed" else 1):
                    raise ConfigError(f"--{key} must be {'nonnegative' if key == 'seed' else 'positive'}")
                cfg[key] = v
        seed = cfg.get("seed")
        if cmd in RANDOMIZED and seed is None:
            raise ConfigError(f"'{cmd}' is randomized: a seed is required (--seed or config 'seed')")
        out = args.out or cfg.get("out", "out")
        os.makedirs(out, exist_ok=True)
        handler = HANDLERS[cmd]
        if cmd in RANDOMIZED:
            res, status, warnings, summary = handler(cfg, out, seed)
        else:
            res, status, warnings, summary = handler(cfg, out)
    except CongCountError as exc:
        print(f"congcount {cmd}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    doc = {"schema_version": 1, "command": cmd, "status": status, "spec": cfg.get("spec"),
           "seed": seed if cmd in RANDOMIZED else None, "result": _num(res), "warnings": warnings}
    jsonschema.validate(doc, _schema("output.schema.json"))
    with open(os.path.join(out, f"{cmd}.json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"{cmd}: {status}: {summary}")
    if status == "failed":
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
