"""Command line front end: ``mpcvc <command> [options]``.

Exit status: 0 when every hard audit passes, 1 on an audit failure, 2 on a
configuration or I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .experiments import COMMANDS, ExperimentConfig, run_experiment
from .graph import GraphFormatError, ParameterError
from .mpc import AuditError, CapacityError

EXIT_OK, EXIT_AUDIT, EXIT_CONFIG = 0, 1, 2

# nested config-file sections are flattened onto these keys
_SECTIONS = ("graph", "algorithm", "output", "run")
_ALIASES = {"path": "graph_path", "file": "graph_path", "c-scale": "c_scale",
            "c-audit": "c_audit", "final-mode": "final_mode", "final_phase_mode": "final_mode",
            "report": "out"}


def parse_seeds(text: str) -> list:
    """``7`` or ``A..B`` (inclusive)."""
    try:
        if ".." in text:
            a, b = text.split("..")
            lo, hi = int(a), int(b)
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(text)]
    except ValueError:
        raise ParameterError(f"bad seed spec {text!r}; expected INT or A..B") from None


def _flatten(doc: dict) -> dict:
    flat = {}
    for key, val in doc.items():
        if key in _SECTIONS and isinstance(val, dict):
            flat.update(_flatten(val))
        else:
            flat[_ALIASES.get(key, key)] = val
    return flat


def load_config_file(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParameterError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ParameterError(f"{path}: top level must be an object")
    flat = _flatten(doc)
    if "seed" in flat:
        flat["seeds"] = [int(flat.pop("seed"))]
    if isinstance(flat.get("seeds"), str):
        flat["seeds"] = parse_seeds(flat["seeds"])
    return flat


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mpcvc", description="Round-compressed peeling experiments")
    ap.add_argument("command", nargs="?", choices=COMMANDS)
    ap.add_argument("--config", help="JSON config file; flags override its values")
    src = ap.add_mutually_exclusive_group()
    src.add_argument("--graph", dest="graph_path", help="edge-list file")
    src.add_argument("--gen", help="gnp:N:P or bip:NL:NR:P")
    ap.add_argument("--s", type=int, help="machine memory (default n)")
    ap.add_argument("--s-values", help="comma-separated s list for memory-sweep")
    ap.add_argument("--c-scale", type=float)
    ap.add_argument("--c-audit", type=float)
    ap.add_argument("--final-mode", choices=("single", "iterated"))
    seeds = ap.add_mutually_exclusive_group()
    seeds.add_argument("--seed", type=int)
    seeds.add_argument("--seeds", help="inclusive range A..B")
    ap.add_argument("--out", help="report path (stdout if omitted)")
    ap.add_argument("--format", choices=("json", "csv"))
    ap.add_argument("--axes", help="comma-separated CSV columns")
    ap.add_argument("--workers", type=int)
    ap.add_argument("--trials", type=int)
    ap.add_argument("--exact-limit", type=int)
    ap.add_argument("--sandwich-floor", type=float)
    return ap


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    values = load_config_file(args.config) if args.config else {}
    flags = {k: v for k, v in vars(args).items() if v is not None and k != "config"}
    if "seed" in flags:
        flags["seeds"] = [flags.pop("seed")]
    elif "seeds" in flags:
        flags["seeds"] = parse_seeds(flags["seeds"])
    if "s_values" in flags:
        try:
            flags["s_values"] = [int(x) for x in flags["s_values"].split(",")]
        except ValueError:
            raise ParameterError(f"bad --s-values {flags['s_values']!r}") from None
    if "axes" in flags:
        flags["axes"] = flags["axes"].split(",")
    # a source flag replaces whichever source the file named
    if "gen" in flags or "graph_path" in flags:
        values.pop("gen", None)
        values.pop("graph_path", None)
    values.update(flags)
    if "command" not in values:
        raise ParameterError("no command given")
    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(values) - known
    if unknown:
        raise ParameterError(f"unknown config keys {sorted(unknown)}")
    return ExperimentConfig(**values)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        report = run_experiment(cfg)
    except (ParameterError, GraphFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CapacityError, AuditError) as exc:
        print(f"audit failure: {exc}", file=sys.stderr)
        return EXIT_AUDIT
    if not cfg.out:
        from .experiments import emit_plot_data
        sys.stdout.write(report.to_json() if cfg.format == "json"
                         else emit_plot_data(report, cfg.axes))
    failed = [name for name, ok in report.audits.items() if not ok]
    if failed:
        print(f"audit failure: {', '.join(failed)}", file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
