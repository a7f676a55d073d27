"""Search-based equivalence testing guided by robustness.

Candidates are fixed-length input words.  Each one is simulated, its abstract
outputs are compared with the hypothesis, and its objective is the upper end
of the finite-trace robustness interval of the current formula.  Each search
in ``STRATEGIES`` drives the objective down, because words that nearly
violate the formula are where the hypothesis is most likely wrong.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .mealy import Bits, MealyMachine, Word
from .stl import Formula, RobustInterval, Trace, fin_robust, to_text
from .sul import BudgetExhausted, Timeout

log = logging.getLogger(__name__)

STRATEGIES = ("random", "hc", "ga")


@dataclass
class StrategyConfig:
    kind: str = "ga"
    length: int = 30
    random_batch: int = 150
    hc_children: int = 60
    hc_survivors: int = 5
    hc_keep_parents: bool = False
    population: int = 150
    mutation: float = 0.01
    crossover: float = 0.5
    tournament: int = 2
    elitism: int = 1
    generations: int = 20
    carry_over: bool = True
    eq_margin: float = 1.0

    def __post_init__(self):
        self.kind = self.kind.lower()
        if self.kind not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.kind!r}; expected one of {STRATEGIES}")
        for name in ("mutation", "crossover"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} probability {p} outside [0, 1]")
        if self.length < 1:
            raise ValueError("word length must be positive")
        if not self.population >= max(self.elitism, 1):
            raise ValueError("population smaller than elitism")
        if not self.hc_children >= 1 or not self.hc_survivors >= 1:
            raise ValueError("hill climbing needs children and survivors")
        if self.tournament < 1 or self.generations < 0:
            raise ValueError("bad tournament size or generation cap")


@dataclass
class Candidate:
    word: Word
    objective: float | None = None
    robustness: RobustInterval | None = None
    outputs: list[Bits] | None = None

    @property
    def evaluated(self) -> bool:
        return self.objective is not None


@dataclass
class Counterexample:
    word: Word
    trace: Trace
    system_outputs: list[Bits]
    hypothesis_outputs: list[Bits]
    robustness: RobustInterval
    violated: bool

    @property
    def disagrees(self) -> bool:
        return self.system_outputs != self.hypothesis_outputs


@dataclass
class EquivResult:
    counterexample: Counterexample | None = None
    exhausted: bool = False
    generations: int = 0
    evaluations: int = 0
    best_objective: float = float("inf")
    history: list[float] = field(default_factory=list)


class _Found(Exception):
    def __init__(self, cex: Counterexample):
        self.cex = cex


class EquivalenceTester:
    """Stateful tester: owns the seeded generator and carried-over populations."""

    def __init__(self, oracle, cfg: StrategyConfig, seed: int = 0):
        self.oracle = oracle
        self.cfg = cfg
        self.rng = np.random.default_rng(seed)
        self.sigma: tuple[str, ...] = tuple(oracle.sigma)
        self.carried: dict[str, list[Candidate]] = {}
        self.queries = 0
        self.deadline: float | None = None

    # -- evaluation -------------------------------------------------------------

    def _evaluate(self, cand: Candidate, hypothesis: MealyMachine, spec: Formula, result: EquivResult) -> None:
        trace = self.oracle.simulate(cand.word)
        system = self.oracle.abstract_outputs(cand.word)
        self.queries += 1
        result.evaluations += 1
        if cand.robustness is None:
            cand.robustness = fin_robust(spec, trace, 0, self.cfg.eq_margin)
            cand.objective = cand.robustness.hi
        cand.outputs = system
        predicted = hypothesis.run(cand.word)
        violated = cand.robustness.hi < 0
        if violated or system != predicted:
            raise _Found(Counterexample(cand.word, trace, system, predicted, cand.robustness, violated))

    def _evaluate_all(self, cands: Sequence[Candidate], hypothesis, spec, result) -> None:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise Timeout("wall-clock timeout during equivalence testing")
        for c in cands:
            self._evaluate(c, hypothesis, spec, result)
        best = min(c.objective for c in cands)
        result.best_objective = min(result.best_objective, best)
        result.history.append(best)

    # -- population operators ---------------------------------------------------

    def random_words(self, count: int) -> list[Candidate]:
        idx = self.rng.integers(len(self.sigma), size=(count, self.cfg.length))
        return [Candidate(tuple(self.sigma[i] for i in row)) for row in idx]

    def hc_children(self, parents: Sequence[Candidate]) -> list[Candidate]:
        """Each parent spawns children with one random position set to a random symbol."""
        children = []
        for p in parents:
            for _ in range(self.cfg.hc_children):
                word = list(p.word)
                pos = int(self.rng.integers(len(word)))
                word[pos] = self.sigma[int(self.rng.integers(len(self.sigma)))]
                children.append(Candidate(tuple(word)))
        return children

    def hc_select(self, parents: Sequence[Candidate], children: Sequence[Candidate]) -> list[Candidate]:
        pool = list(parents) + list(children) if self.cfg.hc_keep_parents else list(children)
        order = sorted(range(len(pool)), key=lambda i: (pool[i].objective, i))
        return [pool[i] for i in order[:self.cfg.hc_survivors]]

    def tournament(self, population: Sequence[Candidate]) -> Candidate:
        picks = self.rng.integers(len(population), size=self.cfg.tournament)
        best = min(population[i].objective for i in picks)
        tied = [int(i) for i in picks if population[i].objective == best]
        return population[tied[int(self.rng.integers(len(tied)))] if len(tied) > 1 else tied[0]]

    def mutate(self, word: list[str]) -> list[str]:
        mask = self.rng.random(len(word)) < self.cfg.mutation
        draws = self.rng.integers(len(self.sigma), size=len(word))
        return [self.sigma[d] if m else a for a, m, d in zip(word, mask, draws)]

    def ga_offspring(self, population: Sequence[Candidate]) -> list[Candidate]:
        """Next generation: elites unchanged, then tournament/crossover/mutation."""
        size = len(population)
        order = sorted(range(size), key=lambda i: (population[i].objective, i))
        nxt = [population[i] for i in order[:self.cfg.elitism]]
        while len(nxt) < size:
            a = list(self.tournament(population).word)
            b = list(self.tournament(population).word)
            if self.rng.random() < self.cfg.crossover:
                mask = self.rng.random(len(a)) < 0.5
                a, b = ([y if m else x for x, y, m in zip(a, b, mask)],
                        [x if m else y for x, y, m in zip(a, b, mask)])
            for child in (a, b):
                if len(nxt) < size:
                    nxt.append(Candidate(tuple(self.mutate(child))))
        return nxt

    # -- driver -----------------------------------------------------------------

    def _initial(self, key: str, size: int) -> list[Candidate]:
        if self.cfg.carry_over and key in self.carried:
            kept = [Candidate(c.word, c.objective, c.robustness) for c in self.carried[key][:size]]
            return kept + self.random_words(size - len(kept))
        return self.random_words(size)

    def find_counterexample(self, hypothesis: MealyMachine, spec: Formula) -> EquivResult:
        """Search for a word where system and hypothesis disagree (or the formula is violated).

        Returns as soon as one is found; otherwise after the generation cap or
        when the simulation budget runs out (``exhausted``).
        """
        cfg = self.cfg
        key = to_text(spec)
        result = EquivResult()
        population: list[Candidate] = []
        try:
            if cfg.kind == "random":
                for gen in range(cfg.generations + 1):
                    population = self.random_words(cfg.random_batch)
                    result.generations = gen
                    self._evaluate_all(population, hypothesis, spec, result)
            elif cfg.kind == "hc":
                population = self._initial(key, cfg.hc_survivors)
                self._evaluate_all(population, hypothesis, spec, result)
                for gen in range(1, cfg.generations + 1):
                    children = self.hc_children(population)
                    result.generations = gen
                    self._evaluate_all(children, hypothesis, spec, result)
                    population = self.hc_select(population, children)
            else:
                population = self._initial(key, cfg.population)
                self._evaluate_all(population, hypothesis, spec, result)
                for gen in range(1, cfg.generations + 1):
                    population = self.ga_offspring(population)
                    result.generations = gen
                    self._evaluate_all(population, hypothesis, spec, result)
        except _Found as found:
            result.counterexample = found.cex
        except BudgetExhausted:
            result.exhausted = True
        evaluated = [c for c in population if c.evaluated]
        if evaluated:
            self.carried[key] = evaluated
        return result


def find_counterexample(oracle, hypothesis: MealyMachine, spec: Formula,
                        cfg: StrategyConfig | None = None, seed: int = 0) -> EquivResult:
    """One-shot convenience wrapper around :class:`EquivalenceTester`."""
    return EquivalenceTester(oracle, cfg or StrategyConfig(), seed).find_counterexample(hypothesis, spec)
