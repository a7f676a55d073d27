"""Tiny deterministic systems for fast end-to-end tests."""
from __future__ import annotations

from stlbbc.abstraction import InputMapper, derive_output_mapper
from stlbbc.stl import parse_formula
from stlbbc.sul import SimulationBudget, SystemAdapter, SystemOracle

COUNTER_VARS = {"u": False, "x": False}


class Counter(SystemAdapter):
    """``x`` counts the ``b`` symbols seen so far (u = 1 for ``b``)."""

    parallel = True
    input_variables = ("u",)
    output_variables = ("x",)

    def __init__(self):
        self.x = 0.0

    def reset(self):
        self.x = 0.0

    def step(self, inputs):
        self.x += inputs[0]
        return (self.x,)


COUNTER_INPUTS = InputMapper.from_dict(["u"], {"a": {"u": 0.0}, "b": {"u": 1.0}})


def counter_oracle(specs, max_runs=None) -> SystemOracle:
    formulas = [parse_formula(s, COUNTER_VARS) for s in specs]
    return SystemOracle(Counter(), COUNTER_INPUTS, derive_output_mapper(formulas), SimulationBudget(max_runs))
