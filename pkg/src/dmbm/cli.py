"""Command-line experiment runner.

Each subcommand reads one JSON experiment spec, runs it and writes a
results file (CSV by default, with a ``.meta.json`` sidecar, or JSON).

    dmbm simulate --spec recipes/fig7a_simulation.json --threads 0
    dmbm validate --spec recipes/fig7b_compare.json

Exit codes: 0 success, 2 invalid spec or parameters, 3 resource cap hit,
4 file system error.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import os
import sys
from pathlib import Path

from .analysis import (ALL_SYSTEMS, capacity_curve, complexity, config_for, energy_saving,
                       spectral_efficiency, theoretical_aber, throughput)
from .channel import snr_to_n0
from .core import ENUMERATION_CAP
from .errors import ConfigurationError, ResourceCapError
from .io import FORMATS, ResultTable, run_metadata, write_results
from .montecarlo import StoppingRule, run_angle_sweep, run_ber

EXIT_OK, EXIT_VALIDATION, EXIT_RESOURCE, EXIT_IO = 0, 2, 3, 4
OUTPUT_DIR_ENV = "DMBM_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "results"

KINDS = ("ber", "theory", "angle-sweep", "capacity", "complexity", "efficiency", "compare")
COMMANDS = {
    "simulate": "ber", "theory": "theory", "angle-sweep": "angle-sweep", "capacity": "capacity",
    "complexity": "complexity", "efficiency": "efficiency", "compare": "compare",
}
SYSTEM_KEYS = ("M", "n_R", "n_T", "m_rf", "phi_deg")
TOP_KEYS = {"kind", "description", "systems", "snr_db", "seed", "stopping", "output", "format",
            "threads", "angles_deg", "channel_samples", "capacity_normalization", "tau_s",
            "aber_source", "reference", *SYSTEM_KEYS}
ABER_SOURCES = ("theory", "simulation", "none")
# execution settings that never change results; kept out of run metadata
EXECUTION_KEYS = ("output", "threads")


class SpecError(ConfigurationError):
    """The experiment spec is malformed or inconsistent."""


# -- spec resolution ------------------------------------------------------

def load_spec(path) -> dict:
    text = Path(path).read_text(encoding="utf-8")  # OSError -> I/O exit code
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecError(f"spec file {path} is not valid JSON: {e}") from None
    if not isinstance(raw, dict):
        raise SpecError(f"spec file {path} must hold a JSON object")
    return raw


def _grid(value, what: str) -> list[float]:
    if isinstance(value, list):
        pts = [float(v) for v in value]
    elif isinstance(value, dict):
        missing = {"start", "stop", "step"} - set(value)
        if missing:
            raise SpecError(f"{what} grid needs start, stop and step (missing {sorted(missing)})")
        start, stop, step = (float(value[k]) for k in ("start", "stop", "step"))
        if step <= 0 or stop < start:
            pts = []
        else:
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            pts = [round(start + i * step, 10) for i in range(n)]
    else:
        raise SpecError(f"{what} must be a list or a {{start, stop, step}} object")
    if not pts:
        raise SpecError(f"{what} grid is empty")
    return pts


def parse_grid(text: str) -> dict:
    """``START:STOP:STEP`` (stop inclusive) as a grid object."""
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise SpecError(f"grid override must look like START:STOP:STEP, got {text!r}") from None
    return {"start": start, "stop": stop, "step": step}


def _label(entry: dict, duplicate: bool) -> str:
    if not duplicate:
        return entry["system"]
    parts = [f"{k}={entry[k]}" for k in ("M", "n_T", "m_rf", "n_R") if entry.get(k) is not None]
    return f"{entry['system']}(" + ",".join(parts) + ")"


def resolve_spec(raw: dict, kind: str | None = None, overrides: dict | None = None) -> dict:
    """Validate ``raw`` and fill every default; returns a new dict."""
    spec = copy.deepcopy(raw)
    for k, v in (overrides or {}).items():
        if v is not None:
            if k == "max_trials":
                spec.setdefault("stopping", {})["max_trials"] = v
            else:
                spec[k] = v
    unknown = set(spec) - TOP_KEYS
    if unknown:
        raise SpecError(f"unknown spec keys: {sorted(unknown)}")
    declared = spec.get("kind")
    if kind is None:
        if declared is None:
            raise SpecError("spec has no 'kind'")
        kind = declared
    elif declared is not None and declared != kind:
        raise SpecError(f"spec kind {declared!r} does not match this subcommand ({kind!r})")
    if kind not in KINDS:
        raise SpecError(f"unknown experiment kind {kind!r}; expected one of {KINDS}")

    systems = spec.get("systems")
    if not systems or not isinstance(systems, list):
        raise SpecError("spec needs a nonempty 'systems' list")
    entries = []
    for item in systems:
        if isinstance(item, str):
            item = {"system": item}
        if not isinstance(item, dict) or "system" not in item:
            raise SpecError(f"bad systems entry {item!r}")
        bad = set(item) - {"system", "label", *SYSTEM_KEYS}
        if bad:
            raise SpecError(f"unknown keys {sorted(bad)} in systems entry for {item['system']}")
        if item["system"] not in ALL_SYSTEMS:
            raise SpecError(f"unknown system tag {item['system']!r}; expected one of {ALL_SYSTEMS}")
        e = {"system": item["system"]}
        for k in SYSTEM_KEYS:
            e[k] = item.get(k, spec.get(k))
        e["n_R"] = 1 if e["n_R"] is None else e["n_R"]
        if e["M"] is None:
            raise SpecError(f"{e['system']} entry needs M")
        e["label"] = item.get("label")
        entries.append(e)
    names = [e["system"] for e in entries]
    for e in entries:
        if e["label"] is None:
            e["label"] = _label(e, names.count(e["system"]) > 1)
    labels = [e["label"] for e in entries]
    if len(set(labels)) != len(labels):
        raise SpecError(f"system labels must be unique, got {labels}")
    for e in entries:
        build_config(e)  # raises ConfigurationError on invalid parameters
        if kind == "complexity" and e["m_rf"] is None:
            raise SpecError(f"complexity of {e['label']} is evaluated at a DMBM efficiency; needs m_rf")

    rule = StoppingRule()
    if _uses_simulation(kind, spec):
        try:
            rule = StoppingRule(**(spec.get("stopping") or {}))
        except TypeError as e:
            raise SpecError(f"bad stopping rule: {e}") from None
    out = {
        "kind": kind,
        "description": spec.get("description", ""),
        "systems": [{k: e[k] for k in ("label", "system", *SYSTEM_KEYS)} for e in entries],
        "seed": int(spec.get("seed", 0)),
        "format": spec.get("format", "csv"),
        "threads": int(spec.get("threads", 1)),
        "output": spec.get("output"),
    }
    if out["format"] not in FORMATS:
        raise SpecError(f"format must be one of {FORMATS}, got {out['format']!r}")
    if out["threads"] < 0:
        raise SpecError("threads must be >= 0 (0 = one per CPU)")
    if out["seed"] < 0:
        raise SpecError("seed must be a nonnegative integer")

    aber_source = spec.get("aber_source", "theory")
    if kind == "efficiency" and aber_source not in ABER_SOURCES:
        raise SpecError(f"aber_source must be one of {ABER_SOURCES}")
    needs_grid = kind not in ("complexity",) and not (kind == "efficiency" and aber_source == "none")
    if needs_grid:
        if "snr_db" not in spec:
            raise SpecError(f"{kind} experiments need an snr_db grid")
        out["snr_db"] = _grid(spec["snr_db"], "snr_db")
    if _uses_simulation(kind, spec):
        out["stopping"] = {"min_bit_errors": rule.min_bit_errors, "max_trials": rule.max_trials,
                           "ber_floor": rule.ber_floor, "block_size": rule.block_size}
    if kind == "angle-sweep":
        if "angles_deg" not in spec:
            raise SpecError("angle-sweep needs an angles_deg grid")
        out["angles_deg"] = _grid(spec["angles_deg"], "angles_deg")
        if any(e["system"] != "DMBM" for e in entries):
            raise SpecError("angle sweeps apply to DMBM systems only")
    if kind == "capacity":
        out["channel_samples"] = int(spec.get("channel_samples", 2000))
        out["capacity_normalization"] = spec.get("capacity_normalization", "AR")
        if out["channel_samples"] < 1:
            raise SpecError("channel_samples must be >= 1")
        if out["capacity_normalization"] not in ("AR", "AR2"):
            raise SpecError("capacity_normalization must be 'AR' or 'AR2'")
    if kind == "efficiency":
        out["aber_source"] = aber_source
        out["tau_s"] = float(spec.get("tau_s", 1.0))
        if not out["tau_s"] > 0:
            raise SpecError("tau_s must be positive")
        ref = spec.get("reference")
        if ref is None:
            dm = [e["label"] for e in entries if e["system"] == "DMBM"]
            if not dm:
                raise SpecError("efficiency needs a 'reference' label (or a DMBM entry)")
            ref = dm[0]
        if ref not in labels:
            raise SpecError(f"reference {ref!r} is not one of the system labels {labels}")
        out["reference"] = ref
    return out


def _uses_simulation(kind: str, spec: dict) -> bool:
    return kind in ("ber", "compare", "angle-sweep") or (
        kind == "efficiency" and spec.get("aber_source", "theory") == "simulation")


def build_config(entry: dict):
    phi = None if entry.get("phi_deg") is None else math.radians(entry["phi_deg"])
    try:
        return config_for(entry["system"], entry["M"], entry["n_R"], entry.get("n_T"),
                          entry.get("m_rf"), phi)
    except TypeError as e:
        raise SpecError(f"bad parameters for {entry['system']}: {e}") from None


# -- experiment runners ---------------------------------------------------

def _check_sim_size(cfg, label):
    if cfg.eta > ENUMERATION_CAP:
        raise ResourceCapError(
            f"{label}: eta={cfg.eta} means 2^{cfg.eta} ML metrics per trial, over the cap "
            f"of eta={ENUMERATION_CAP}")


def _rule(spec) -> StoppingRule:
    return StoppingRule(**spec["stopping"])


def _threads(spec) -> int:
    return spec["threads"] or (os.cpu_count() or 1)


def _simulate_all(spec, progress):
    curves = []
    for e in spec["systems"]:
        cfg = build_config(e)
        _check_sim_size(cfg, e["label"])
        curves.append(run_ber(cfg, spec["snr_db"], _rule(spec), spec["seed"], _threads(spec),
                              progress=progress))
    return curves


def _incomplete(spec, curves):
    return [{"system": e["label"], "snr_db": p.snr_db}
            for e, c in zip(spec["systems"], curves) for p in c.points if not p.completed]


def run_ber_kind(spec, progress=None) -> tuple[ResultTable, dict]:
    curves = _simulate_all(spec, progress)
    t = ResultTable("ber", ["snr_db", "system", "trials", "bit_errors", "ber", "ci95"])
    for e, c in zip(spec["systems"], curves):
        for p in c.points:
            t.rows.append([p.snr_db, e["label"], p.trials, p.bit_errors, p.ber, p.ci95])
    return t, {"incomplete_points": _incomplete(spec, curves)}


def run_compare(spec, progress=None) -> tuple[ResultTable, dict]:
    curves = _simulate_all(spec, progress)
    labels = [e["label"] for e in spec["systems"]]
    t = ResultTable("compare", ["snr_db", *labels])
    for i, snr in enumerate(spec["snr_db"]):
        t.rows.append([snr, *(c.points[i].ber for c in curves)])
    crossings = {}
    for lab, c in zip(labels, curves):
        x = c.snr_at(1e-3)
        crossings[lab] = None if math.isnan(x) else x
    details = [{"system": lab, "snr_db": p.snr_db, "trials": p.trials, "bit_errors": p.bit_errors,
                "completed": p.completed} for lab, c in zip(labels, curves) for p in c.points]
    return t, {"snr_at_ber_1e-3": crossings, "incomplete_points": _incomplete(spec, curves),
               "points": details}


def run_theory(spec, progress=None) -> tuple[ResultTable, dict]:
    labels = [e["label"] for e in spec["systems"]]
    cfgs = [build_config(e) for e in spec["systems"]]
    t = ResultTable("theory", ["snr_db", *labels])
    for snr in spec["snr_db"]:
        t.rows.append([snr, *(theoretical_aber(c, snr_to_n0(snr)) for c in cfgs)])
    return t, {}


def run_angle(spec, progress=None) -> tuple[ResultTable, dict]:
    t = ResultTable("angle-sweep", ["snr_db", "angle_deg", "system", "trials", "bit_errors", "ber", "ci95"])
    summary = []
    for e in spec["systems"]:
        cfg = build_config(e)
        _check_sim_size(cfg, e["label"])
        for snr in spec["snr_db"]:
            sw = run_angle_sweep(cfg, snr, spec["angles_deg"], _rule(spec), spec["seed"],
                                 _threads(spec), progress)
            for a, p in zip(sw.angles_deg, sw.points):
                t.rows.append([snr, float(a), e["label"], p.trials, p.bit_errors, p.ber, p.ci95])
            summary.append({"system": e["label"], "snr_db": snr, "argmin_deg": sw.best_angle_deg,
                            "optimum_deg": sw.optimum_deg(cfg.M)})
    return t, {"optimum": summary}


def run_capacity(spec, progress=None) -> tuple[ResultTable, dict]:
    cfgs = [build_config(e) for e in spec["systems"]]
    curves = capacity_curve(cfgs, spec["snr_db"], spec["channel_samples"], spec["seed"],
                            spec["capacity_normalization"])
    t = ResultTable("capacity", ["snr_db", "system", "capacity_bits", "stderr"])
    for e, curve in zip(spec["systems"], curves):
        for snr, est in zip(spec["snr_db"], curve):
            t.rows.append([snr, e["label"], est.mean, est.stderr])
    return t, {}


def run_complexity(spec, progress=None) -> tuple[ResultTable, dict]:
    t = ResultTable("complexity", ["system", "eta", "real_multiplications"])
    for e in spec["systems"]:
        eta = spectral_efficiency(e["system"], e["M"], e["n_T"], e["m_rf"])
        t.rows.append([e["label"], eta, complexity(e["system"], e["M"], e["n_T"], e["m_rf"], e["n_R"])])
    return t, {}


def run_efficiency(spec, progress=None) -> tuple[ResultTable, dict]:
    entries = spec["systems"]
    cfgs = [build_config(e) for e in entries]
    ref_eta = cfgs[[e["label"] for e in entries].index(spec["reference"])].eta

    def saving(cfg):
        return energy_saving(cfg.eta, ref_eta) if cfg.eta <= ref_eta else None

    if spec["aber_source"] == "none":
        t = ResultTable("efficiency", ["system", "eta", "energy_saving_pct"])
        for e, cfg in zip(entries, cfgs):
            t.rows.append([e["label"], cfg.eta, saving(cfg)])
        return t, {}
    t = ResultTable("efficiency", ["snr_db", "system", "eta", "aber", "throughput", "energy_saving_pct"])
    extra = {}
    if spec["aber_source"] == "simulation":
        curves = _simulate_all(spec, progress)
        aber = [list(c.ber) for c in curves]
        extra["incomplete_points"] = _incomplete(spec, curves)
    else:
        aber = [[theoretical_aber(c, snr_to_n0(s)) for s in spec["snr_db"]] for c in cfgs]
    for e, cfg, ab in zip(entries, cfgs, aber):
        for snr, a in zip(spec["snr_db"], ab):
            a = float(a)
            t.rows.append([snr, e["label"], cfg.eta, a, throughput(a, cfg.eta, spec["tau_s"]), saving(cfg)])
    return t, extra


RUNNERS = {
    "ber": run_ber_kind, "compare": run_compare, "theory": run_theory, "angle-sweep": run_angle,
    "capacity": run_capacity, "complexity": run_complexity, "efficiency": run_efficiency,
}


def output_path(spec: dict, spec_path, out: str | None) -> Path:
    if out:
        return Path(out)
    if spec.get("output"):
        return Path(spec["output"])
    base = Path(os.environ.get(OUTPUT_DIR_ENV, DEFAULT_OUTPUT_DIR))
    return base / f"{Path(spec_path).stem}.{spec['format']}"


def run_experiment(spec: dict, progress=None) -> ResultTable:
    """Run a resolved spec and return its table with metadata attached."""
    table, extra = RUNNERS[spec["kind"]](spec, progress)
    recorded = {k: v for k, v in spec.items() if k not in EXECUTION_KEYS}
    table.metadata = run_metadata(recorded, spec["seed"])
    if extra:
        table.metadata["results"] = extra
    return table


# -- entry point ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dmbm", description="DMBM link-level experiments")
    sub = p.add_subparsers(dest="command", required=True)
    for name in (*COMMANDS, "validate"):
        s = sub.add_parser(name)
        s.add_argument("--spec", required=True, help="JSON experiment spec")
        if name == "validate":
            continue
        s.add_argument("--seed", type=int, help="master seed (overrides the spec)")
        s.add_argument("--out", help="results file path")
        s.add_argument("--format", choices=FORMATS)
        s.add_argument("--threads", type=int, help="worker threads, 0 = one per CPU")
        s.add_argument("--grid", help="SNR grid override START:STOP:STEP in dB")
        s.add_argument("--max-trials", type=int, help="per-point trial budget override")
        s.add_argument("--progress", action="store_true", help="JSON progress lines on stderr")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = load_spec(args.spec)
        if args.command == "validate":
            spec = resolve_spec(raw)
            json.dump(spec, sys.stdout, indent=2)
            sys.stdout.write("\n")
            return EXIT_OK
        overrides = {"seed": args.seed, "format": args.format, "threads": args.threads,
                     "max_trials": args.max_trials,
                     "snr_db": parse_grid(args.grid) if args.grid else None}
        spec = resolve_spec(raw, COMMANDS[args.command], overrides)
        table = run_experiment(spec, sys.stderr if args.progress else None)
        path = write_results(table, output_path(spec, args.spec, args.out), spec["format"])
        print(path)
        return EXIT_OK
    except ResourceCapError as e:
        print(f"error: resource cap: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ConfigurationError, ValueError) as e:
        print(f"error: invalid configuration: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as e:
        print(f"error: I/O: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
