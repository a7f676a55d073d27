import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stlbbc.stl import (
    INF, Atom, FormulaError, HorizonError, Next, Not, Or, Prop, StlSyntaxError, Top, Trace, Until, Verdict,
    abstract_verdict, atoms, boolean_verdict, fin_robust, fin_robust_batch, horizon, parse_formula,
    point_robust, pretty, to_text, verdict,
)

import helpers
import reference

V = {"velocity": False, "gear": True}


def vtrace(*values):
    return Trace(("velocity",), np.array(values, dtype=float))


def test_golden_always_below():
    f = parse_formula("G(velocity < 120)", V)
    rob = fin_robust(f, vtrace(100, 110, 125))
    assert (rob.lo, rob.hi) == (-math.inf, -5.0)
    assert verdict(f, vtrace(100, 110, 125)) is Verdict.VIOLATED
    assert verdict(f, vtrace(100, 110)) is Verdict.UNKNOWN
    assert fin_robust(f, vtrace(100, 110)).hi == 10.0


def test_bounded_eventually_is_decided_inside_its_window():
    f = parse_formula("F_[0,2] velocity > 5", V)
    assert verdict(f, vtrace(0, 7)) is Verdict.SATISFIED
    assert fin_robust(f, vtrace(0, 7)).lo == 2.0
    assert verdict(f, vtrace(0, 1, 2)) is Verdict.VIOLATED
    assert point_robust(f, vtrace(0, 1, 2, 9)) == -3.0


def test_until_requires_left_operand_at_the_witness():
    f = parse_formula("(velocity < 5) U_[0,1] (velocity > 3)", V)
    # witness at 1 has velocity 6, which breaks the left operand there
    assert point_robust(f, vtrace(1, 6)) == pytest.approx(-1.0)
    assert point_robust(f, vtrace(4, 0)) == pytest.approx(1.0)


def test_equality_atoms_use_the_margin():
    f = parse_formula("gear == 2", V)
    t = Trace(("gear",), np.array([2.0]))
    assert fin_robust(f, t).lo == 1.0
    assert fin_robust(f, t, eq_margin=0.25).hi == 0.25
    assert fin_robust(parse_formula("gear != 2", V), t).hi == -1.0


def test_equality_on_continuous_variable_is_rejected():
    with pytest.raises(FormulaError, match="discrete"):
        parse_formula("velocity == 3", V)


def test_undeclared_variable_is_rejected():
    with pytest.raises(FormulaError, match="undeclared"):
        parse_formula("speed < 3", V)


@pytest.mark.parametrize("text", [
    "G(", "velocity <", "F_[3,1] velocity > 0", "velocity < 1 &&", "X_[0,1] velocity > 0", "velocity ? 3",
])
def test_syntax_errors(text):
    with pytest.raises(StlSyntaxError):
        parse_formula(text, V)


def test_sugar_desugars_to_core():
    f = parse_formula("G_[1,4] velocity >= 3", V)
    assert f == Not(Until(1, 4, Top(), Atom("velocity", "<", 3.0)))
    assert parse_formula("[] velocity < 1", V) == parse_formula("G velocity < 1", V)
    assert parse_formula("<> velocity < 1", V) == parse_formula("F velocity < 1", V)
    assert parse_formula("!!(velocity < 1)", V) == Atom("velocity", "<", 1.0)
    imp = parse_formula("velocity < 1 -> velocity > 0", V)
    assert imp == Or(Not(Atom("velocity", "<", 1.0)), Atom("velocity", ">", 0.0))


def test_horizon():
    assert horizon(parse_formula("velocity < 1", V)) == 0
    assert horizon(parse_formula("X X velocity < 1", V)) == 2
    assert horizon(parse_formula("G_[0,26](velocity < 1) || G_[28,28] velocity > 2", V)) == 28
    assert horizon(parse_formula("G_[0,3] F_[1,2] velocity < 1", V)) == 5
    assert horizon(parse_formula("G velocity < 1", V)) == INF


def test_point_robust_needs_the_horizon():
    f = parse_formula("X velocity < 1", V)
    with pytest.raises(HorizonError):
        point_robust(f, vtrace(0))
    assert point_robust(f, vtrace(0, 0.5)) == 0.5


def test_text_round_trip_and_pretty():
    f = parse_formula("G(gear == 2 -> velocity > 17.5)", V)
    assert parse_formula(to_text(f), V) == f
    assert parse_formula(pretty(f), V) == f
    assert pretty(f).startswith("G (")


def test_atoms_in_first_appearance_order():
    f = parse_formula("G(velocity < 3 -> F gear == 2) && velocity < 3", V)
    assert atoms(f) == [Atom("velocity", "<", 3.0), Atom("gear", "==", 2.0)]


def test_batch_matches_scalar():
    rng = np.random.default_rng(1)
    for _ in range(50):
        f = helpers.random_formula(rng)
        cols = helpers.random_columns(rng, 6)
        batch = {v: np.stack([c, c[::-1]], axis=1) for v, c in cols.items()}
        lo, hi = fin_robust_batch(f, batch)
        rob = fin_robust(f, Trace(("x", "y"), np.stack([cols["x"], cols["y"]], axis=1)))
        assert (lo[0], hi[0]) == (rob.lo, rob.hi)


def test_three_valued_verdicts_on_bits():
    p = parse_formula("G x > 0", helpers.XY)
    t = Trace(("x",), np.array([1.0, -1.0]))
    assert boolean_verdict(p, t) is Verdict.VIOLATED
    g = Not(Until(0, INF, Top(), Not(Prop(0))))
    assert abstract_verdict(g, [[True], [True]]) is Verdict.UNKNOWN
    assert abstract_verdict(g, [[True], [False]]) is Verdict.VIOLATED
    assert abstract_verdict(Next(Prop(0)), []) is Verdict.UNKNOWN


values = st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=8)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6), values, values)
def test_point_robust_matches_direct_recursion(seed, xs, ys):
    rng = np.random.default_rng(seed)
    f = helpers.random_formula(rng, depth=2, max_bound=2)
    n = min(len(xs), len(ys))
    h = horizon(f)
    if not h < n:
        return
    cols = {"x": np.array(xs[:n]), "y": np.array(ys[:n])}
    trace = Trace(("x", "y"), np.stack([cols["x"], cols["y"]], axis=1))
    assert point_robust(f, trace) == pytest.approx(float(reference.robust(f, cols, 0)))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6), values, st.floats(-5, 5))
def test_extending_a_trace_narrows_the_interval(seed, xs, extra):
    rng = np.random.default_rng(seed)
    f = helpers.random_formula(rng, depth=2)
    t = Trace(("x", "y"), np.stack([xs, xs[::-1]], axis=1))
    longer = t.append({"x": extra, "y": -extra})
    assert fin_robust(f, longer).issubset(fin_robust(f, t))


def test_trace_helpers():
    t = Trace.from_rows([{"x": 1, "y": 2}, {"x": 3, "y": 4}])
    assert t.variables == ("x", "y")
    assert list(t.column("y")) == [2.0, 4.0]
    assert t.rows()[1] == {"x": 3.0, "y": 4.0}
    assert len(t.prefix(1)) == 1
    with pytest.raises(KeyError):
        t.column("z")
