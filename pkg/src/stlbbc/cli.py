"""Command-line entry point: ``stlbbc <command> ...``.

Exit codes: 0 completed, 1 usage or configuration error, 2 system adapter failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bbc
from .config import ConfigError, RunConfig, load
from .equiv import STRATEGIES
from .mealy import MachineFormatError, MealyMachine
from .stl import FormulaError, Trace, fin_robust, parse_formula, verdict
from .sul import AdapterError

EXIT_OK, EXIT_USAGE, EXIT_ADAPTER = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def read_trace(path: str | Path) -> Trace:
    """CSV with a header row of variable names, one row per time step."""
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if not header:
                raise UsageError(f"{path}: empty trace file")
            rows = [[float(x) for x in row] for row in reader if row]
    except FileNotFoundError:
        raise UsageError(f"trace file not found: {path}") from None
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None
    header = [h.strip() for h in header]
    if any(len(r) != len(header) for r in rows):
        raise UsageError(f"{path}: rows do not match the header")
    return Trace(tuple(header), np.array(rows, dtype=float).reshape(len(rows), len(header)))


def write_trace(trace: Trace, path: str | Path | None) -> None:
    fh = sys.stdout if path is None else open(path, "w", newline="")
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(trace.variables)
        for row in trace.values:
            writer.writerow([repr(float(x)) for x in row])
    finally:
        if path is not None:
            fh.close()


def _config(args) -> RunConfig:
    cfg = load(args.config, getattr(args, "seed", None))
    if getattr(args, "strategy", None):
        cfg.strategy.kind = args.strategy
    if getattr(args, "out", None):
        cfg.output_dir = args.out
    return cfg


def cmd_falsify(args) -> int:
    cfg = _config(args)
    outcome = bbc.run_bbc(cfg)
    paths = bbc.write_outcome(outcome, cfg.output_dir)
    counts = outcome.status_counts()
    print(f"falsified {counts[bbc.FALSIFIED]}, not falsified {counts[bbc.NOT_FALSIFIED]}, "
          f"inconclusive {counts[bbc.INCONCLUSIVE]} ({outcome.stop_reason}; "
          f"{outcome.counts['runs']} runs, {outcome.machine.size if outcome.machine else 0} states)")
    print(f"results: {paths['outcome']}")
    if outcome.stop_reason == "adapter-failure":
        print(f"stlbbc: system failure: {outcome.error}", file=sys.stderr)
        return EXIT_ADAPTER
    return EXIT_OK


def cmd_monitor(args) -> int:
    trace = read_trace(args.trace)
    discrete = set(args.discrete or ())
    f = parse_formula(args.formula, {v: v in discrete for v in trace.variables})
    rob = fin_robust(f, trace, 0, args.eq_margin)
    result = {"formula": args.formula, "verdict": verdict(f, trace, args.eq_margin).value,
              "robustness": [bbc.ext(rob.lo), bbc.ext(rob.hi)], "length": len(trace)}
    print(json.dumps(result, sort_keys=True))
    return EXIT_OK


def cmd_learn(args) -> int:
    cfg = _config(args)
    machine, info = bbc.learn_model(cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "machine.json").write_text(machine.to_json() + "\n")
    (out / "machine.dot").write_text(machine.to_dot())
    (out / "learn.json").write_text(json.dumps(info, indent=2, sort_keys=True) + "\n")
    print(f"learned {machine.size} states ({info['stop_reason']}); machine: {out / 'machine.json'}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _config(args)
    if args.word is not None:
        word = args.word.split()
    elif args.word_file is not None:
        try:
            word = Path(args.word_file).read_text().split()
        except FileNotFoundError:
            raise UsageError(f"word file not found: {args.word_file}") from None
    else:
        raise UsageError("give --word or --word-file")
    unknown = sorted(set(word) - set(cfg.symbols))
    if unknown:
        raise UsageError(f"unknown input symbols: {unknown}")
    oracle = cfg.oracle()
    try:
        trace = oracle.simulate(word)
    finally:
        oracle.adapter.close()
    write_trace(trace, args.output)
    return EXIT_OK


def cmd_check_model(args) -> int:
    cfg = _config(args)
    try:
        doc = json.loads(Path(args.machine).read_text())
    except FileNotFoundError:
        raise UsageError(f"machine file not found: {args.machine}") from None
    except json.JSONDecodeError as exc:
        raise MachineFormatError(f"{args.machine}: {exc}") from None
    machine = MealyMachine.from_portable(doc)
    specs = args.formula or cfg.specs
    report = bbc.check_saved_model(machine, specs, cfg)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_report(args) -> int:
    try:
        doc = json.loads(Path(args.results).read_text())
    except FileNotFoundError:
        raise UsageError(f"results file not found: {args.results}") from None
    timing = None
    timing_path = Path(args.timing) if args.timing else Path(args.results).with_suffix(".timing.json")
    if timing_path.exists():
        timing = json.loads(timing_path.read_text())
    if doc.get("version") != bbc.DOCUMENT_VERSION:
        raise UsageError(f"unsupported results version {doc.get('version')!r}")
    if args.format == "csv":
        text = bbc.results_csv(doc, timing)
    else:
        rows = list(csv.DictReader(bbc.results_csv(doc, timing).splitlines()))
        text = json.dumps({"version": bbc.DOCUMENT_VERSION, "summary": doc["summary"], "rows": rows},
                          indent=2, sort_keys=True) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="stlbbc", description="Robustness-guided black-box checking of STL specifications.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def with_config(sp, seed=True):
        sp.add_argument("--config", required=True, help="TOML run configuration")
        if seed:
            sp.add_argument("--seed", type=int, help="override the configured seed")
        sp.add_argument("--out", help="output directory (overrides [output] dir)")

    sp = sub.add_parser("falsify", help="run black-box checking on the configured specs")
    with_config(sp)
    sp.add_argument("--strategy", choices=STRATEGIES)
    sp.set_defaults(func=cmd_falsify)

    sp = sub.add_parser("monitor", help="verdict and robustness of a trace file")
    sp.add_argument("--formula", required=True)
    sp.add_argument("--trace", required=True, help="CSV with a header of variable names")
    sp.add_argument("--eq-margin", type=float, default=1.0)
    sp.add_argument("--discrete", action="append", metavar="VAR",
                    help="variable admitting == and != (repeatable)")
    sp.set_defaults(func=cmd_monitor)

    sp = sub.add_parser("learn", help="learn a machine with search-based equivalence testing")
    with_config(sp)
    sp.add_argument("--strategy", choices=STRATEGIES)
    sp.set_defaults(func=cmd_learn)

    sp = sub.add_parser("simulate", help="run the configured system on an input word")
    with_config(sp, seed=False)
    sp.add_argument("--word", help="space-separated input symbols")
    sp.add_argument("--word-file")
    sp.add_argument("--output", "-o", help="trace CSV (default: stdout)")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("check-model", help="model check a saved machine and replay witnesses")
    with_config(sp, seed=False)
    sp.add_argument("--machine", required=True)
    sp.add_argument("--formula", action="append", help="spec to check (repeatable; default: config specs)")
    sp.add_argument("--output", "-o")
    sp.set_defaults(func=cmd_check_model)

    sp = sub.add_parser("report", help="render a results document as CSV or JSON rows")
    sp.add_argument("--results", required=True)
    sp.add_argument("--timing")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--output", "-o")
    sp.set_defaults(func=cmd_report)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except AdapterError as exc:
        print(f"stlbbc: system failure: {exc}", file=sys.stderr)
        return EXIT_ADAPTER
    except (UsageError, ConfigError, FormulaError, MachineFormatError, KeyError, OSError) as exc:
        print(f"stlbbc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
