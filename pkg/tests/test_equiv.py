import numpy as np
import pytest

from stlbbc.abstraction import derive_output_mapper
from stlbbc.config import RunConfig
from stlbbc.equiv import Candidate, EquivalenceTester, StrategyConfig, find_counterexample
from stlbbc.mealy import MealyMachine
from stlbbc.stl import fin_robust, parse_formula

from toys import COUNTER_VARS, counter_oracle


def constant(sigma, bits):
    return MealyMachine(sigma, tuple(f"p{i}" for i in range(len(bits))), 0,
                        (tuple((bits, 0) for _ in sigma),))


def small(kind="ga", **kw):
    kw.setdefault("length", 10)
    kw.setdefault("generations", 5)
    return StrategyConfig(kind=kind, population=kw.pop("population", 20), random_batch=20,
                          hc_children=kw.pop("hc_children", 6), **kw)


@pytest.mark.parametrize("kind", ["random", "hc", "ga"])
def test_exact_hypothesis_yields_no_counterexample(kind):
    spec = parse_formula("G(x < 100)", COUNTER_VARS)
    oracle = counter_oracle(["G(x < 100)"])
    res = find_counterexample(oracle, constant(("a", "b"), (True,)), spec, small(kind), seed=1)
    assert res.counterexample is None and not res.exhausted
    assert res.generations == 5


@pytest.mark.parametrize("kind", ["random", "hc", "ga"])
def test_wrong_hypothesis_is_caught(kind):
    spec = parse_formula("G(x < 1)", COUNTER_VARS)
    oracle = counter_oracle(["G(x < 1)"])
    res = find_counterexample(oracle, constant(("a", "b"), (True,)), spec, small(kind), seed=0)
    cex = res.counterexample
    assert cex is not None and cex.violated and cex.disagrees
    assert "b" in cex.word
    assert cex.robustness.hi < 0


def test_objective_is_the_robustness_upper_bound():
    spec = parse_formula("G(x < 100)", COUNTER_VARS)
    oracle = counter_oracle(["G(x < 100)"])
    tester = EquivalenceTester(oracle, small("ga"), seed=3)
    tester.find_counterexample(constant(("a", "b"), (True,)), spec)
    for cand in tester.carried[str(spec)]:
        assert cand.objective == fin_robust(spec, oracle.simulate(cand.word)).hi


def test_seeded_runs_are_reproducible():
    spec = parse_formula("G(x < 100)", COUNTER_VARS)
    words = []
    for _ in range(2):
        tester = EquivalenceTester(counter_oracle(["G(x < 100)"]), small("ga"), seed=9)
        res = tester.find_counterexample(constant(("a", "b"), (True,)), spec)
        words.append(([c.word for c in tester.carried[str(spec)]], res.history))
    assert words[0] == words[1]


def test_budget_stops_the_search_exactly():
    spec = parse_formula("G(x < 100)", COUNTER_VARS)
    oracle = counter_oracle(["G(x < 100)"], max_runs=37)
    res = find_counterexample(oracle, constant(("a", "b"), (True,)), spec, small("random", generations=50))
    assert res.exhausted
    assert oracle.runs == 37


def test_carry_over_seeds_the_next_population():
    spec = parse_formula("G(x < 100)", COUNTER_VARS)
    tester = EquivalenceTester(counter_oracle(["G(x < 100)"]), small("ga", generations=1), seed=2)
    hyp = constant(("a", "b"), (True,))
    tester.find_counterexample(hyp, spec)
    carried = [c.word for c in tester.carried[str(spec)]]
    initial = tester._initial(str(spec), 20)
    assert [c.word for c in initial] == carried
    tester.cfg.carry_over = False
    assert [c.word for c in tester._initial(str(spec), 20)] != carried


def test_hill_climbing_keeps_the_five_best():
    tester = EquivalenceTester(counter_oracle(["G(x < 100)"]), StrategyConfig(kind="hc", length=6), seed=0)
    parents = [Candidate(("a",) * 6, objective=50.0)]
    children = tester.hc_children(parents)
    assert len(children) == 60
    assert all(sum(x != y for x, y in zip(c.word, parents[0].word)) <= 1 for c in children)
    for i, c in enumerate(children):
        c.objective = float(i % 13)
    kept = tester.hc_select(parents, children)
    assert [c.objective for c in kept] == [0.0, 0.0, 0.0, 0.0, 0.0]


def test_hill_climbing_with_parents_never_gets_worse():
    tester = EquivalenceTester(counter_oracle(["G(x < 100)"]),
                               StrategyConfig(kind="hc", length=6, hc_keep_parents=True), seed=0)
    parents = [Candidate(("a",) * 6, objective=float(i)) for i in range(5)]
    children = tester.hc_children(parents)
    for c in children:
        c.objective = 10.0
    kept = tester.hc_select(parents, children)
    assert [c.objective for c in kept] == [0.0, 1.0, 2.0, 3.0, 4.0]
    tester.cfg.hc_keep_parents = False
    assert [c.objective for c in tester.hc_select(parents, children)] == [10.0] * 5


def test_ga_without_variation_only_copies():
    tester = EquivalenceTester(counter_oracle(["G(x < 100)"]),
                               StrategyConfig(kind="ga", length=5, population=12, mutation=0.0, crossover=0.0),
                               seed=0)
    population = tester.random_words(12)
    for i, c in enumerate(population):
        c.objective = float(i)
    nxt = tester.ga_offspring(population)
    assert len(nxt) == 12
    assert nxt[0] is population[0]
    assert {c.word for c in nxt} <= {c.word for c in population}


def test_mutation_rate():
    sigma = tuple("abcdefghij")

    class Oracle:
        pass

    oracle = Oracle()
    oracle.sigma = sigma
    tester = EquivalenceTester(oracle, StrategyConfig(length=10_000, mutation=0.3), seed=5)
    word = ["a"] * 10_000
    changed = sum(x != y for x, y in zip(word, tester.mutate(word))) / 10_000
    expected = 0.3 * 9 / 10
    assert abs(changed - expected) <= 0.1 * expected


def test_invalid_parameters():
    with pytest.raises(ValueError):
        StrategyConfig(kind="annealing")
    with pytest.raises(ValueError):
        StrategyConfig(mutation=1.5)
    with pytest.raises(ValueError):
        StrategyConfig(population=0)


def needle_search(kind, seed):
    """G(velocity < 100) on the transmission with an all-true one-state hypothesis."""
    cfg = RunConfig(specs=["G(velocity < 100)"], max_runs=2000,
                    strategy=StrategyConfig(kind=kind, generations=1000))
    specs = cfg.formulas()
    oracle = cfg.oracle(derive_output_mapper(specs))
    hyp = constant(oracle.sigma, (True,))
    return find_counterexample(oracle, hyp, specs[0], cfg.strategy, seed)


def test_genetic_search_finds_the_needle_random_does_not():
    ga = [needle_search("ga", s).counterexample is not None for s in range(10)]
    rnd = [needle_search("random", s).counterexample is not None for s in range(10)]
    assert sum(ga) == 10
    assert sum(rnd) <= 3
