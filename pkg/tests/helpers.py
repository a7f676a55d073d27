"""Random formula and trace generators shared by the tests."""
from __future__ import annotations

import numpy as np

from stlbbc.abstraction import OutputMapper, propositionalize
from stlbbc.stl import Atom, Next, Not, Or, Until, always, conj, eventually, parse_formula

XY = {"x": False, "y": False}

# Templates over two atoms ``a`` and ``b``; every one has horizon at most 7.
TEMPLATES = [
    "G_[0,3] a",
    "F_[0,3] b",
    "a U_[0,3] b",
    "G_[0,4] (a -> F_[0,2] b)",
    "F_[1,3] (a && b)",
    "G_[0,2] F_[0,2] a",
    "F_[0,2] G_[0,2] b",
    "X X (a || !b)",
    "(a U_[1,2] b) || G_[0,3] !a",
    "G_[0,3] (a -> X b)",
    "!a U_[0,4] (a && X !b)",
    "F_[2,4] a && G_[0,5] (b || a)",
]


def instantiate(template: str, a: str, b: str) -> str:
    return template.replace("a", f"({a})").replace("b", f"({b})")


def template_formulas(a: str = "x > 0.5", b: str = "y < 1.5"):
    return [parse_formula(instantiate(t, a, b), XY) for t in TEMPLATES]


def prop_templates():
    """The templates over propositions p0 (tracks x > 0) and p1 (tracks y > 0)."""
    mapper = OutputMapper((Atom("x", ">", 0.0), Atom("y", ">", 0.0)))
    plus = [
        "G (a -> X !b)",
        "a U b",
        "F_[3,6] (a && !b)",
    ]
    return [propositionalize(parse_formula(instantiate(t, "x > 0", "y > 0"), XY), mapper)
            for t in TEMPLATES + plus]


def random_formula(rng, depth: int = 3, max_bound: int = 3):
    """Bounded formula over ``x``/``y`` with constants on a small grid."""
    if depth == 0 or rng.random() < 0.2:
        var = "xy"[int(rng.integers(2))]
        op = "<>"[int(rng.integers(2))]
        return Atom(var, op, float(rng.integers(-2, 3)))
    kind = int(rng.integers(7))
    sub = lambda: random_formula(rng, depth - 1, max_bound)  # noqa: E731
    lo = int(rng.integers(0, max_bound + 1))
    hi = int(rng.integers(lo, max_bound + 1))
    if kind == 0:
        return Not(sub())
    if kind == 1:
        return Or(sub(), sub())
    if kind == 2:
        return conj(sub(), sub())
    if kind == 3:
        return Next(sub())
    if kind == 4:
        return Until(lo, hi, sub(), sub())
    if kind == 5:
        return always(sub(), lo, hi)
    return eventually(sub(), lo, hi)


def random_columns(rng, n: int, grid=None) -> dict[str, np.ndarray]:
    if grid is None:
        return {v: np.round(rng.uniform(-3, 3, size=n), 1) for v in "xy"}
    return {v: rng.choice(grid, size=n).astype(float) for v in "xy"}

