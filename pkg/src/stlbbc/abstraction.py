"""Finite-alphabet mappers between abstract words and real-valued signals."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .stl import Atom, Formula, FormulaError, Prop, Trace, atom_text, atom_truth, atoms, map_leaves

Bits = tuple[bool, ...]


@dataclass(frozen=True)
class InputMapper:
    """Stateless map from each input symbol to one input valuation."""

    variables: tuple[str, ...]
    entries: tuple[tuple[str, tuple[float, ...]], ...]

    def __post_init__(self):
        if not self.entries:
            raise ValueError("input mapper needs at least one symbol")
        names = [name for name, _ in self.entries]
        if len(set(names)) != len(names):
            raise ValueError("duplicate input symbols")
        for name, values in self.entries:
            if len(values) != len(self.variables):
                raise ValueError(f"symbol {name!r} does not assign every input variable")
        object.__setattr__(self, "_table", dict(self.entries))

    @classmethod
    def from_dict(cls, variables: Sequence[str], symbols: Mapping[str, Mapping[str, float]]) -> "InputMapper":
        entries = []
        for name, valuation in symbols.items():
            missing = [v for v in variables if v not in valuation]
            if missing:
                raise ValueError(f"symbol {name!r} does not assign {missing}")
            entries.append((name, tuple(float(valuation[v]) for v in variables)))
        return cls(tuple(variables), tuple(entries))

    @property
    def sigma(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.entries)

    def __call__(self, symbol: str) -> tuple[float, ...]:
        try:
            return self._table[symbol]
        except KeyError:
            raise KeyError(f"unknown input symbol {symbol!r}") from None

    def valuation(self, symbol: str) -> dict[str, float]:
        return dict(zip(self.variables, self(symbol)))


def concretize(word: Iterable[str], mapper: InputMapper) -> list[tuple[float, ...]]:
    return [mapper(a) for a in word]


@dataclass(frozen=True)
class OutputMapper:
    """Evaluates a fixed, ordered list of atomic predicates on a valuation.

    Bit ``i`` of the output is the truth of ``predicates[i]``; the order is the
    order of first appearance across the specifications it was derived from.
    """

    predicates: tuple[Atom, ...]

    def __post_init__(self):
        object.__setattr__(self, "_index", {a: i for i, a in enumerate(self.predicates)})

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(atom_text(a) for a in self.predicates)

    def index(self, atom: Atom) -> int:
        try:
            return self._index[atom]
        except KeyError:
            raise FormulaError(f"atom {atom_text(atom)!r} is not among the mapper's propositions") from None

    def __call__(self, valuation: Mapping[str, float]) -> Bits:
        return tuple(a.holds(float(valuation[a.var])) for a in self.predicates)

    def bits_matrix(self, trace: Trace) -> np.ndarray:
        out = np.zeros((len(trace), len(self.predicates)), dtype=bool)
        for i, a in enumerate(self.predicates):
            out[:, i] = atom_truth(a, trace.column(a.var))
        return out


def derive_output_mapper(specs: Sequence[Formula]) -> OutputMapper:
    if not specs:
        raise ValueError("need at least one specification")
    seen: dict[Atom, None] = {}
    for f in specs:
        for a in atoms(f):
            seen.setdefault(a)
    return OutputMapper(tuple(seen))


def abstract_trace(trace: Trace, mapper: OutputMapper) -> list[Bits]:
    return [tuple(bool(b) for b in row) for row in mapper.bits_matrix(trace)]


def propositionalize(f: Formula, mapper: OutputMapper) -> Formula:
    """Replace each atom by the proposition that tracks it."""
    def leaf(g):
        if isinstance(g, Prop):
            return g
        i = mapper.index(g)
        return Prop(i, atom_text(g))
    return map_leaves(f, leaf)
