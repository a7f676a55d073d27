import pytest

from stlbbc.config import DEFAULT_SYMBOLS, ConfigError, RunConfig, from_dict, load
from stlbbc.sul import AutoTransmission, ExternalProcessAdapter

DOC = {
    "seed": 4,
    "specs": {"formulas": ["G(velocity < 50)"], "equality_margin": 0.5},
    "search": {"strategy": "hc", "length": 12, "generations": 3, "params": {"hc_children": 10}},
    "budget": {"max_runs": 300, "timeout": 20, "state_cap": 500},
    "output": {"dir": "out"},
}


def test_from_dict_reads_every_section():
    c = from_dict(DOC)
    assert c.seed == 4 and c.specs == ["G(velocity < 50)"]
    assert c.strategy.kind == "hc" and c.strategy.hc_children == 10 and c.length == 12
    assert c.horizon == 12
    assert c.eq_margin == 0.5 and c.strategy.eq_margin == 0.5
    assert (c.max_runs, c.timeout, c.state_cap, c.output_dir) == (300, 20, 500, "out")
    assert from_dict(DOC, seed=9).seed == 9
    assert isinstance(c.adapter(), AutoTransmission)
    assert c.input_mapper().sigma == tuple(DEFAULT_SYMBOLS)


def test_load_toml(tmp_path):
    p = tmp_path / "run.toml"
    p.write_text('seed = 2\n[specs]\nformulas = ["G(gear == 2 -> velocity > 20)"]\n'
                 '[system]\nkind = "external"\ncommand = "python3 plant.py"\n')
    c = load(p)
    assert c.seed == 2
    assert isinstance(c.adapter(), ExternalProcessAdapter)
    assert c.formulas()[0] is not None


@pytest.mark.parametrize("doc", [
    {"specs": {"formulas": []}},
    {"specs": {"formulas": ["G(x < 1)"]}, "search": {"bogus": 1}},
    {"specs": {"formulas": ["G(velocity < 1)"]}, "search": {"strategy": "anneal"}},
    {"specs": {"formulas": ["G(velocity < 1)"]}, "variables": {"discrete": ["speed"]}},
    {"specs": {"formulas": ["G(velocity < 1)"]}, "input": {"symbols": {"a": {"throttle": 1}}}},
])
def test_invalid_configurations(doc):
    with pytest.raises(ConfigError):
        c = from_dict(doc)
        c.input_mapper()


def test_bad_formula_is_a_config_error():
    with pytest.raises(ConfigError, match="velocity == 3"):
        RunConfig(specs=["velocity == 3"]).formulas()


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load(tmp_path / "nope.toml")
