import numpy as np
import pytest

from stlbbc.learner import (
    LearnerError, MachineOracle, NotACounterexample, ObservationTable, learn_exact, learn_initial, refine,
)
from stlbbc.mealy import MealyMachine, distinguish, random_machine

import reference

T, F = (True,), (False,)


def parity():
    """p is true after an odd number of ``b`` symbols."""
    return MealyMachine(("a", "b"), ("p",), 0, (((F, 0), (T, 1)), ((T, 1), (F, 0))))


def counter3():
    """Outputs true on ``a`` only in location 2; ``b`` advances mod 3."""
    rows = tuple(((T if loc == 2 else F, loc), (F, (loc + 1) % 3)) for loc in range(3))
    return MealyMachine(("a", "b"), ("p",), 0, rows)


def test_constant_system_gives_one_state():
    m = MealyMachine(("a", "b"), ("p",), 0, (((T, 0), (T, 0)),))
    hyp, _ = learn_initial(MachineOracle(m))
    assert hyp.size == 1
    assert distinguish(hyp, m) is None


def test_parity_is_learned_from_the_initial_table():
    hyp, table = learn_initial(MachineOracle(parity()))
    assert hyp.size == 2
    assert distinguish(hyp, parity()) is None
    assert table.S == [(), ("b",)]


def test_refinement_adds_a_state():
    target = counter3()
    oracle = MachineOracle(target)
    hyp, table = learn_initial(oracle, eager_consistency=False)
    cex = distinguish(hyp, target)
    assert cex is not None
    bigger = refine(table, oracle, cex)
    assert bigger.size > hyp.size


def test_agreeing_word_is_not_a_counterexample():
    oracle = MachineOracle(parity())
    hyp, table = learn_initial(oracle)
    with pytest.raises(NotACounterexample):
        table.refine(("a", "b", "b"))


def test_eager_consistency_keeps_hypothesis_in_line_with_the_table():
    rng = np.random.default_rng(11)
    for _ in range(20):
        target = random_machine(rng, int(rng.integers(2, 7)), ("a", "b", "c"), 2)
        oracle = MachineOracle(target)
        hyp, table = learn_initial(oracle, eager_consistency=True)
        while (cex := distinguish(hyp, target)) is not None:
            hyp = table.refine(cex)
            assert table.disagreement() is None
            rows = [table.row(s) for s in table.S]
            assert len(set(rows)) == len(rows)


@pytest.mark.parametrize("eager", [True, False])
def test_learned_machines_are_exact_and_minimal(eager):
    rng = np.random.default_rng(7)
    for _ in range(25):
        target = random_machine(rng, int(rng.integers(1, 8)), ("a", "b", "c")[:int(rng.integers(1, 4))], 2)
        hyp, _ = learn_exact(target, eager_consistency=eager)
        assert distinguish(hyp, target) is None
        assert hyp.size == reference.minimal_state_count(target)


def test_query_accounting():
    oracle = MachineOracle(parity())
    hyp, table = learn_initial(oracle)
    assert table.membership_queries == oracle.queries == oracle.misses
    assert table.membership_queries <= len(table.cells)


def test_table_rejects_a_changed_oracle():
    class Flaky(MachineOracle):
        def _answer(self, word):
            out = super()._answer(word)
            return [tuple(not b for b in out[0])] + out[1:] if self.misses > 6 else out

    oracle = Flaky(counter3())
    hyp, table = learn_initial(oracle, eager_consistency=False)
    with pytest.raises((LearnerError, NotACounterexample)):
        for _ in range(5):
            hyp = table.refine(distinguish(hyp, counter3()) or ("a",))


def test_table_starts_with_single_symbol_suffixes():
    table = ObservationTable(MachineOracle(parity()))
    assert table.E == [("a",), ("b",)]
