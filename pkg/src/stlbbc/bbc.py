"""Multi-specification black-box checking driver, model reuse, and reports."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from .abstraction import OutputMapper, derive_output_mapper, propositionalize
from .checker import CheckStatus, find_bad_prefix
from .config import RunConfig
from .equiv import EquivalenceTester
from .learner import learn_initial
from .mealy import MealyMachine, Word
from .stl import Formula, RobustInterval, Trace, Verdict, fin_robust, parse_formula, pretty, verdict
from .sul import AdapterError, BudgetExhausted, SystemOracle, Timeout

log = logging.getLogger(__name__)

DOCUMENT_VERSION = 1
FALSIFIED, NOT_FALSIFIED, INCONCLUSIVE = "falsified", "not-falsified", "inconclusive"


def ext(x: float) -> float | str:
    """JSON-safe extended real."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


def unext(x: float | str) -> float:
    return float(x)


@dataclass
class Witness:
    word: Word
    trace: Trace
    robustness: RobustInterval

    def to_dict(self) -> dict:
        return {
            "word": list(self.word),
            "variables": list(self.trace.variables),
            "values": [[float(x) for x in row] for row in self.trace.values],
            "robustness": [ext(self.robustness.lo), ext(self.robustness.hi)],
        }


@dataclass
class SpecResult:
    index: int
    formula: str
    status: str = INCONCLUSIVE
    witness: Witness | None = None
    found_by: str | None = None
    runs_at_decision: int | None = None
    seconds: float | None = None

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "formula": self.formula,
            "status": self.status,
            "found_by": self.found_by,
            "runs_at_decision": self.runs_at_decision,
            "witness": self.witness.to_dict() if self.witness else None,
        }


@dataclass
class BbcOutcome:
    specs: list[SpecResult]
    machine: MealyMachine | None
    counts: dict[str, int]
    seed: int | None
    refinement_log: list[dict] = field(default_factory=list)
    elapsed: float = 0.0
    stop_reason: str = "completed"
    error: str | None = None

    def status_counts(self) -> dict[str, int]:
        out = {FALSIFIED: 0, NOT_FALSIFIED: 0, INCONCLUSIVE: 0}
        for s in self.specs:
            out[s.status] += 1
        return out

    def to_document(self) -> dict:
        """Canonical, timing-free results document."""
        return {
            "version": DOCUMENT_VERSION,
            "seed": self.seed,
            "stop_reason": self.stop_reason,
            "error": self.error,
            "summary": self.status_counts(),
            "counts": dict(sorted(self.counts.items())),
            "machine_states": self.machine.size if self.machine else None,
            "specs": [s.to_dict() for s in self.specs],
            "refinements": self.refinement_log,
        }

    def canonical_json(self) -> str:
        return json.dumps(self.to_document(), sort_keys=True, indent=2) + "\n"

    def timing_document(self) -> dict:
        return {
            "version": DOCUMENT_VERSION,
            "elapsed_seconds": self.elapsed,
            "specs": [{"index": s.index, "seconds": s.seconds} for s in self.specs],
        }

    def to_csv(self) -> str:
        return results_csv(self.to_document(), self.timing_document())


def results_csv(doc: dict, timing: dict | None = None) -> str:
    """One row per spec: falsified count (0/1) and time, as in a results table."""
    seconds = {}
    if timing:
        seconds = {s["index"]: s["seconds"] for s in timing.get("specs", [])}
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["index", "formula", "status", "falsified", "found_by", "runs", "seconds"])
    for s in doc["specs"]:
        t = seconds.get(s["index"])
        writer.writerow([s["index"], s["formula"], s["status"], int(s["status"] == FALSIFIED),
                         s["found_by"] or "", "" if s["runs_at_decision"] is None else s["runs_at_decision"],
                         "" if t is None else f"{t:.3f}"])
    return buf.getvalue()


class _Driver:
    def __init__(self, cfg: RunConfig, oracle: SystemOracle | None, specs: Sequence[Formula]):
        self.cfg = cfg
        self.specs = list(specs)
        self.mapper = derive_output_mapper(self.specs)
        self.oracle = oracle if oracle is not None else cfg.oracle(self.mapper)
        self.props = [propositionalize(f, self.oracle.output_mapper) for f in self.specs]
        self.tester = EquivalenceTester(self.oracle, cfg.strategy, cfg.seed or 0)
        self.results = [SpecResult(i, pretty(f)) for i, f in enumerate(self.specs)]
        self.refinements: list[dict] = []
        self.start = time.monotonic()
        self.deadline = None if cfg.timeout is None else self.start + float(cfg.timeout)
        self.tester.deadline = self.deadline
        self.table = None
        self.hyp: MealyMachine | None = None
        self.error: str | None = None

    def unfalsified(self) -> list[int]:
        return [r.index for r in self.results if r.status != FALSIFIED]

    def check_time(self) -> None:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise Timeout("wall-clock timeout")

    def record(self, i: int, word: Word, trace: Trace, rob: RobustInterval, how: str) -> None:
        r = self.results[i]
        r.status, r.found_by = FALSIFIED, how
        r.witness = Witness(tuple(word), trace, rob)
        r.runs_at_decision = self.oracle.runs
        r.seconds = time.monotonic() - self.start
        log.info("falsified %s by %s after %d runs", r.formula, how, self.oracle.runs)

    def refine(self, word: Word, source: str) -> None:
        before = self.hyp.size
        self.hyp = self.table.refine(word)
        self.refinements.append({"word": list(word), "source": source,
                                 "states_before": before, "states_after": self.hyp.size})

    def model_check(self, skip: set[int]) -> bool:
        """Check every unfalsified spec; True when the hypothesis was refined."""
        for i in self.unfalsified():
            if i in skip:
                continue
            self.check_time()
            res = find_bad_prefix(self.hyp, self.props[i], self.cfg.horizon, self.cfg.state_cap)
            if res.status is CheckStatus.INCONCLUSIVE:
                log.warning("state cap reached checking %s; treating as no counterexample",
                            self.results[i].formula)
                skip.add(i)
                continue
            if not res.found:
                continue
            trace = self.oracle.simulate(res.word)
            rob = fin_robust(self.specs[i], trace, 0, self.cfg.eq_margin)
            if rob.hi < 0:
                self.record(i, res.word, trace, rob, "model-checking")
                continue
            if self.oracle.abstract_outputs(res.word) != self.hyp.run(res.word):
                self.refine(res.word, "model-checking")
                return True
            # The abstract trace is bad but the robustness is exactly zero at
            # the deciding atom: nothing to learn, nothing confirmed.
            log.info("model-checking witness for %s has zero robustness", self.results[i].formula)
            skip.add(i)
        return False

    def equivalence(self) -> bool:
        """Search for disagreements per unfalsified spec; True when refined."""
        for i in self.unfalsified():
            self.check_time()
            res = self.tester.find_counterexample(self.hyp, self.specs[i])
            if res.exhausted:
                raise BudgetExhausted("simulation budget exhausted during equivalence testing")
            cex = res.counterexample
            if cex is None:
                continue
            if cex.violated:
                self.record(i, cex.word, cex.trace, cex.robustness, "equivalence-testing")
            if cex.disagrees:
                self.refine(cex.word, "equivalence-testing")
                return True
        return False

    def run(self) -> BbcOutcome:
        stop = "completed"
        try:
            self.hyp, self.table = learn_initial(self.oracle, self.cfg.eager_consistency)
            while self.unfalsified():
                skip: set[int] = set()
                while self.model_check(skip):
                    skip = set()
                if not self.unfalsified():
                    break
                if not self.equivalence():
                    for i in self.unfalsified():
                        r = self.results[i]
                        r.status, r.runs_at_decision = NOT_FALSIFIED, self.oracle.runs
                        r.seconds = time.monotonic() - self.start
                    break
        except Timeout:
            stop = "timeout"
        except BudgetExhausted:
            stop = "budget"
        except AdapterError as exc:
            log.error("system failure: %s", exc)
            stop, self.error = "adapter-failure", str(exc)
        if self.table is not None and self.table.hypothesis is not None:
            self.hyp = self.table.hypothesis
        counts = dict(self.oracle.counters())
        counts["membership_queries"] = self.table.membership_queries if self.table else 0
        counts["equivalence_queries"] = self.tester.queries
        counts["refinements"] = len(self.refinements)
        elapsed = time.monotonic() - self.start
        for r in self.results:
            if r.status == INCONCLUSIVE:
                r.runs_at_decision, r.seconds = self.oracle.runs, elapsed
        return BbcOutcome(self.results, self.hyp, counts, self.cfg.seed, self.refinements, elapsed, stop,
                          self.error)


def run_bbc(cfg: RunConfig, oracle: SystemOracle | None = None) -> BbcOutcome:
    """Learn, model check, validate witnesses, and test equivalence until done."""
    return _Driver(cfg, oracle, cfg.formulas()).run()


def learn_model(cfg: RunConfig, oracle: SystemOracle | None = None) -> tuple[MealyMachine, dict]:
    """Learning only: refine with equivalence testing until no disagreement is found."""
    driver = _Driver(cfg, oracle, cfg.formulas())
    stop = "completed"
    try:
        driver.hyp, driver.table = learn_initial(driver.oracle, cfg.eager_consistency)
        refined = True
        while refined:
            refined = False
            for i, spec in enumerate(driver.specs):
                driver.check_time()
                res = driver.tester.find_counterexample(driver.hyp, spec)
                if res.exhausted:
                    raise BudgetExhausted("budget exhausted")
                if res.counterexample is not None and res.counterexample.disagrees:
                    driver.refine(res.counterexample.word, "equivalence-testing")
                    refined = True
                    break
    except Timeout:
        stop = "timeout"
    except BudgetExhausted:
        stop = "budget"
    hyp = driver.table.hypothesis if driver.table is not None else None
    if hyp is None:
        raise BudgetExhausted("budget exhausted before an initial hypothesis was built")
    counts = dict(driver.oracle.counters())
    counts["refinements"] = len(driver.refinements)
    return hyp, {"stop_reason": stop, "counts": counts, "states": hyp.size}


def write_outcome(outcome: BbcOutcome, directory: str | Path) -> dict[str, Path]:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = {
        "outcome": d / "outcome.json",
        "timing": d / "outcome.timing.json",
        "csv": d / "outcome.csv",
        "machine": d / "machine.json",
        "dot": d / "machine.dot",
    }
    paths["outcome"].write_text(outcome.canonical_json())
    paths["timing"].write_text(json.dumps(outcome.timing_document(), indent=2, sort_keys=True) + "\n")
    paths["csv"].write_text(outcome.to_csv())
    if outcome.machine is not None:
        paths["machine"].write_text(outcome.machine.to_json() + "\n")
        paths["dot"].write_text(outcome.machine.to_dot())
    return paths


# -- reuse of a learned machine ---------------------------------------------------

def machine_mapper(machine: MealyMachine, variables) -> OutputMapper:
    """Output mapper whose bit order is the machine's proposition list."""
    return OutputMapper(tuple(parse_formula(label, variables) for label in machine.propositions))


def check_saved_model(machine: MealyMachine, specs: Sequence[str], cfg: RunConfig,
                      oracle: SystemOracle | None = None) -> dict[str, Any]:
    """Model check a stored machine against specs and replay the witnesses.

    Raises ``FormulaError`` when a spec uses an atom the machine does not track.
    """
    variables = cfg.variables
    mapper = machine_mapper(machine, variables)
    formulas = [parse_formula(s, variables) for s in specs]
    props = [propositionalize(f, mapper) for f in formulas]
    if oracle is None:
        oracle = cfg.oracle(mapper)
    rows = []
    for text, f, p in zip(specs, formulas, props):
        res = find_bad_prefix(machine, p, cfg.horizon, cfg.state_cap)
        row: dict[str, Any] = {"formula": pretty(f), "source": text,
                               "hypothesis": res.status.value,
                               "witness": None, "replay_verdict": None, "robustness": None,
                               "confirmed": False}
        if res.found:
            trace = oracle.simulate(res.word)
            rob = fin_robust(f, trace, 0, cfg.eq_margin)
            v = verdict(f, trace, cfg.eq_margin)
            row.update(witness=list(res.word), replay_verdict=v.value,
                       robustness=[ext(rob.lo), ext(rob.hi)],
                       confirmed=v is Verdict.VIOLATED)
        rows.append(row)
    his = [unext(r["robustness"][1]) for r in rows if r["robustness"] is not None]
    finite = [x for x in his if math.isfinite(x)]
    summary = {
        "specs": len(rows),
        "hypothesis_counterexamples": sum(r["witness"] is not None for r in rows),
        "confirmed_counterexamples": sum(r["confirmed"] for r in rows),
        "robustness_mean": statistics.fmean(finite) if finite else None,
        "robustness_std": statistics.pstdev(finite) if len(finite) > 1 else (0.0 if finite else None),
        "robustness_min": min(finite) if finite else None,
        "robustness_max": max(finite) if finite else None,
    }
    return {"version": DOCUMENT_VERSION, "machine_states": machine.size,
            "horizon": cfg.horizon, "specs": rows, "summary": summary}
