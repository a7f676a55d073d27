"""Run configuration: TOML loading, validation, and construction of the oracle."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from .abstraction import InputMapper, OutputMapper, derive_output_mapper
from .equiv import StrategyConfig
from .stl import Formula, parse_formula
from .sul import (AutoTransmission, ExternalProcessAdapter, PlantParams, SimulationBudget,
                  SystemAdapter, SystemOracle)


class ConfigError(ValueError):
    pass


DEFAULT_SYMBOLS = {
    "coast": {"throttle": 0.0, "brake": 0.0},
    "gas": {"throttle": 100.0, "brake": 0.0},
    "brake": {"throttle": 0.0, "brake": 325.0},
    "both": {"throttle": 100.0, "brake": 325.0},
}


@dataclass
class RunConfig:
    specs: list[str]
    system: dict = field(default_factory=lambda: {"kind": "builtin"})
    inputs: list[str] = field(default_factory=lambda: ["throttle", "brake"])
    outputs: list[str] = field(default_factory=lambda: ["velocity", "rotation", "gear"])
    discrete: list[str] = field(default_factory=lambda: ["gear"])
    symbols: dict[str, dict[str, float]] = field(default_factory=lambda: dict(DEFAULT_SYMBOLS))
    strategy: StrategyConfig = field(default_factory=StrategyConfig)
    horizon: int | None = None
    seed: int | None = 0
    eq_margin: float = 1.0
    max_runs: int | None = 2000
    timeout: float | None = 600.0
    state_cap: int = 100_000
    eager_consistency: bool = False
    output_dir: str = "bbc-out"

    def __post_init__(self):
        if not self.specs:
            raise ConfigError("at least one specification is required")
        if not self.symbols:
            raise ConfigError("the input mapper needs at least one symbol")
        if self.horizon is None:
            self.horizon = self.strategy.length
        if self.horizon < 1:
            raise ConfigError("horizon must be positive")
        self.strategy.eq_margin = self.eq_margin
        if set(self.inputs) & set(self.outputs):
            raise ConfigError("a variable cannot be both input and output")
        unknown = set(self.discrete) - set(self.inputs) - set(self.outputs)
        if unknown:
            raise ConfigError(f"discrete flags for undeclared variables: {sorted(unknown)}")

    @property
    def length(self) -> int:
        return self.strategy.length

    @property
    def variables(self) -> dict[str, bool]:
        """Declared variables mapped to their discrete flag."""
        names = list(self.inputs) + list(self.outputs)
        return {v: v in self.discrete for v in names}

    def formulas(self) -> list[Formula]:
        out = []
        for text in self.specs:
            try:
                out.append(parse_formula(text, self.variables))
            except ValueError as exc:
                raise ConfigError(f"specification {text!r}: {exc}") from exc
        return out

    def input_mapper(self) -> InputMapper:
        try:
            return InputMapper.from_dict(self.inputs, self.symbols)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def adapter(self) -> SystemAdapter:
        kind = self.system.get("kind", "builtin")
        if kind == "builtin":
            try:
                params = PlantParams.from_dict(dict(self.system.get("params", {})))
                return AutoTransmission(params, self.inputs, self.outputs)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        if kind == "external":
            command = self.system.get("command")
            if not command:
                raise ConfigError("external system needs a command")
            if isinstance(command, str):
                command = command.split()
            return ExternalProcessAdapter(command, self.inputs, self.outputs, self.discrete,
                                          float(self.system.get("timeout", 30.0)))
        raise ConfigError(f"unknown system kind {kind!r}")

    def oracle(self, outputs: OutputMapper | None = None, specs: list[Formula] | None = None) -> SystemOracle:
        if outputs is None:
            outputs = derive_output_mapper(specs if specs is not None else self.formulas())
        budget = SimulationBudget(self.max_runs)
        return SystemOracle(self.adapter(), self.input_mapper(), outputs, budget)


_SEARCH_KEYS = {"strategy", "length", "horizon", "generations", "carry_over", "params",
                "eager_consistency"}


def from_dict(doc: dict[str, Any], seed: int | None = None) -> RunConfig:
    try:
        system = dict(doc.get("system", {"kind": "builtin"}))
        variables = doc.get("variables", {})
        specs_doc = doc.get("specs", {})
        search = doc.get("search", {})
        budget = doc.get("budget", {})
        output = doc.get("output", {})
        unknown = set(search) - _SEARCH_KEYS
        if unknown:
            raise ConfigError(f"unknown [search] keys: {sorted(unknown)}")
        strategy = StrategyConfig(
            kind=search.get("strategy", "ga"),
            length=int(search.get("length", 30)),
            generations=int(search.get("generations", StrategyConfig.generations)),
            carry_over=bool(search.get("carry_over", True)),
            **dict(search.get("params", {})))
        kwargs: dict[str, Any] = dict(
            specs=list(specs_doc.get("formulas", [])),
            system=system,
            strategy=strategy,
            horizon=search.get("horizon"),
            seed=doc.get("seed", 0) if seed is None else seed,
            eq_margin=float(specs_doc.get("equality_margin", 1.0)),
            max_runs=budget.get("max_runs", 2000),
            timeout=budget.get("timeout", 600.0),
            state_cap=int(budget.get("state_cap", 100_000)),
            eager_consistency=bool(search.get("eager_consistency", False)),
            output_dir=str(output.get("dir", "bbc-out")),
        )
        for key in ("inputs", "outputs", "discrete"):
            if key in variables:
                kwargs[key] = list(variables[key])
        symbols = doc.get("input", {}).get("symbols")
        if symbols is not None:
            kwargs["symbols"] = {name: dict(val) for name, val in symbols.items()}
        return RunConfig(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError, AttributeError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def load(path: str | Path, seed: int | None = None) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"configuration file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return from_dict(doc, seed)
