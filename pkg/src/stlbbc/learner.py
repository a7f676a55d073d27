"""Active learning of Mealy machines: L* with Rivest-Schapire suffix analysis.

The observation table keeps a prefix-closed set ``S`` of access words whose
rows are pairwise distinct, and a suffix set ``E`` that starts with every
single symbol.  Counterexamples are reduced by binary search to one
distinguishing suffix, which is the only thing added to ``E``.
"""
from __future__ import annotations

import logging
import threading
from typing import Iterable, Sequence

from .mealy import Bits, MealyMachine, Word

log = logging.getLogger(__name__)


class LearnerError(RuntimeError):
    pass


class NotACounterexample(ValueError):
    pass


class MembershipOracle:
    """Answers membership queries with the output sequence of a word.

    Implementations must be deterministic and prefix-consistent.  ``queries``
    counts every call to :meth:`query`; ``misses`` counts those that needed
    the underlying system (always all of them unless the oracle caches).
    """

    parallel = False

    def __init__(self, sigma: Sequence[str], propositions: Sequence[str] = ()):
        self.sigma = tuple(sigma)
        self.propositions = tuple(propositions)
        self.queries = 0
        self.misses = 0
        self._lock = threading.Lock()

    def query(self, word: Sequence[str]) -> list[Bits]:
        with self._lock:
            self.queries += 1
        return self._answer(tuple(word))

    def query_batch(self, words: Iterable[Sequence[str]]) -> list[list[Bits]]:
        return [self.query(w) for w in words]

    def _answer(self, word: Word) -> list[Bits]:
        raise NotImplementedError


class MachineOracle(MembershipOracle):
    """Membership oracle backed by an explicit machine (for testing learners)."""

    def __init__(self, machine: MealyMachine):
        super().__init__(machine.sigma, machine.propositions)
        self.machine = machine

    def _answer(self, word: Word) -> list[Bits]:
        with self._lock:
            self.misses += 1
        return self.machine.run(word)


class ObservationTable:
    """Observation table; ``eager_consistency`` keeps the hypothesis in
    agreement with every cell by treating disagreements as internal
    counterexamples.  Without it, only external counterexamples refine.
    """

    def __init__(self, oracle: MembershipOracle, eager_consistency: bool = True):
        self.oracle = oracle
        self.eager_consistency = eager_consistency
        self.sigma: tuple[str, ...] = tuple(oracle.sigma)
        self.S: list[Word] = [()]
        self.E: list[Word] = [(a,) for a in self.sigma]
        self.cells: dict[tuple[Word, Word], Bits] = {}
        self.hypothesis: MealyMachine | None = None
        self.membership_queries = 0
        self.refinements = 0

    # -- table maintenance ---------------------------------------------------

    def _ask(self, word: Word) -> list[Bits]:
        self.membership_queries += 1
        return self.oracle.query(word)

    def cell(self, prefix: Word, suffix: Word) -> Bits:
        key = (prefix, suffix)
        if key not in self.cells:
            self.cells[key] = tuple(self._ask(prefix + suffix)[-1])
        return self.cells[key]

    def row(self, prefix: Word) -> tuple[Bits, ...]:
        return tuple(self.cell(prefix, e) for e in self.E)

    def extended(self) -> list[Word]:
        members = set(self.S)
        return [s + (a,) for s in self.S for a in self.sigma if s + (a,) not in members]

    def fill(self, prefixes: Iterable[Word]) -> None:
        """Fill every missing cell of the given rows.

        Longer words are asked first and every answer also fills the cells
        whose word is one of its prefixes, so shared prefixes cost nothing.
        """
        pending: dict[Word, list[tuple[Word, Word]]] = {}
        for s in prefixes:
            for e in self.E:
                if (s, e) not in self.cells:
                    pending.setdefault(s + e, []).append((s, e))
        for word in sorted(pending, key=lambda w: (-len(w), w)):
            if word not in pending:
                continue
            answer = self._ask(word)
            for j in range(len(word), 0, -1):
                for key in pending.pop(word[:j], ()):
                    self.cells[key] = tuple(answer[j - 1])

    def close(self) -> None:
        """Promote extended rows until every one of them matches some row of S."""
        while True:
            self.fill(self.S + self.extended())
            rows = {self.row(s): s for s in self.S}
            if len(rows) != len(self.S):
                raise LearnerError("duplicate rows among access words")
            for sa in self.extended():
                if self.row(sa) not in rows:
                    self.S.append(sa)
                    break
            else:
                return

    def check_consistency(self) -> None:
        # With distinct rows in S this cannot fail; it guards against an
        # oracle that changed its answers.
        rows = [self.row(s) for s in self.S]
        if len(set(rows)) != len(rows):
            raise LearnerError("inconsistent observation table: equal rows in S")

    def build(self) -> MealyMachine:
        self.check_consistency()
        index = {self.row(s): i for i, s in enumerate(self.S)}
        transitions = []
        for s in self.S:
            row = []
            for a in self.sigma:
                target = index.get(self.row(s + (a,)))
                if target is None:
                    raise LearnerError("table is not closed")
                row.append((self.cell(s, (a,)), target))
            transitions.append(tuple(row))
        self.hypothesis = MealyMachine(self.sigma, self.oracle.propositions, 0, tuple(transitions))
        return self.hypothesis

    def disagreement(self) -> Word | None:
        """A table entry the hypothesis predicts wrongly, if any."""
        hyp = self.hypothesis
        for s in self.S + self.extended():
            loc = hyp.location_after(s)
            for e in self.E:
                if hyp.with_initial(loc).run(e)[-1] != self.cells[(s, e)]:
                    return s + e
        return None

    def access(self, location: int) -> Word:
        return self.S[location]

    # -- counterexample processing -------------------------------------------

    def add_suffix_from(self, cex: Word, system: list[Bits]) -> None:
        hyp = self.hypothesis
        predicted = hyp.run(cex)
        mismatch = next((i for i, (x, y) in enumerate(zip(system, predicted)) if tuple(x) != y), None)
        if mismatch is None:
            raise NotACounterexample(f"hypothesis agrees with the system on {' '.join(cex)!r}")
        w = cex[:mismatch + 1]
        m = mismatch
        if m == 0:
            raise LearnerError("single-symbol disagreement contradicts the table; oracle is not deterministic")
        target = tuple(system[m])

        def beta(i: int) -> Bits:
            u = self.access(hyp.location_after(w[:i]))
            return tuple(self._ask(u + w[i:])[-1])

        lo, hi = 0, m
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if beta(mid) == target:
                lo = mid
            else:
                hi = mid
        suffix = w[lo + 1:]
        if suffix in self.E:
            raise LearnerError(f"suffix {suffix!r} already present; oracle is not deterministic")
        self.E.append(suffix)

    def refine(self, cex: Sequence[str]) -> MealyMachine:
        cex = tuple(cex)
        before = self.hypothesis.size
        self.add_suffix_from(cex, self._ask(cex))
        self.refinements += 1
        hyp = self._settle()
        if hyp.size <= before:
            raise LearnerError("refinement did not add a state")
        return hyp

    def _settle(self) -> MealyMachine:
        """Close, build, and fold in table entries the hypothesis gets wrong."""
        while True:
            self.close()
            hyp = self.build()
            if not self.eager_consistency:
                return hyp
            internal = self.disagreement()
            if internal is None:
                return hyp
            log.debug("hypothesis contradicts table on %r", internal)
            self.add_suffix_from(internal, self.oracle_outputs(internal))

    def oracle_outputs(self, word: Word) -> list[Bits]:
        return self._ask(word)


def learn_initial(oracle: MembershipOracle, eager_consistency: bool = True) -> tuple[MealyMachine, ObservationTable]:
    table = ObservationTable(oracle, eager_consistency)
    return table._settle(), table


def refine(table: ObservationTable, oracle: MembershipOracle, cex: Sequence[str]) -> MealyMachine:
    if table.oracle is not oracle:
        raise ValueError("table was built against a different oracle")
    return table.refine(cex)


def learn_exact(target: MealyMachine, max_rounds: int = 1000,
                eager_consistency: bool = True) -> tuple[MealyMachine, ObservationTable]:
    """Learn ``target`` using exact equivalence (``distinguish``) as the teacher."""
    from .mealy import distinguish

    oracle = MachineOracle(target)
    hyp, table = learn_initial(oracle, eager_consistency)
    for _ in range(max_rounds):
        cex = distinguish(hyp, target)
        if cex is None:
            return hyp, table
        hyp = table.refine(cex)
    raise LearnerError("no convergence")
