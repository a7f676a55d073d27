"""Deterministic Mealy machines over a symbol alphabet and bit-vector outputs."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

Bits = tuple[bool, ...]
Word = tuple[str, ...]

PORTABLE_VERSION = 1


class MachineFormatError(ValueError):
    pass


@dataclass(frozen=True)
class MealyMachine:
    """``transitions[location][symbol_index] == (output_bits, target)``."""

    sigma: tuple[str, ...]
    propositions: tuple[str, ...]
    initial: int
    transitions: tuple[tuple[tuple[Bits, int], ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "sigma", tuple(self.sigma))
        object.__setattr__(self, "propositions", tuple(self.propositions))
        object.__setattr__(self, "transitions", tuple(
            tuple((tuple(bool(b) for b in out), int(to)) for out, to in row)
            for row in self.transitions))
        if not self.sigma:
            raise MachineFormatError("empty input alphabet")
        if len(set(self.sigma)) != len(self.sigma):
            raise MachineFormatError("duplicate input symbols")
        size = len(self.transitions)
        if not 0 <= self.initial < size:
            raise MachineFormatError(f"initial location {self.initial} out of range")
        width = len(self.propositions)
        for loc, row in enumerate(self.transitions):
            if len(row) != len(self.sigma):
                raise MachineFormatError(f"location {loc} is not total over the alphabet")
            for out, to in row:
                if not 0 <= to < size:
                    raise MachineFormatError(f"location {loc}: target {to} out of range")
                if len(out) != width:
                    raise MachineFormatError(f"location {loc}: output has {len(out)} bits, expected {width}")
        object.__setattr__(self, "_index", {a: i for i, a in enumerate(self.sigma)})

    @property
    def size(self) -> int:
        return len(self.transitions)

    def symbol_index(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise KeyError(f"unknown input symbol {symbol!r}") from None

    def step(self, location: int, symbol: str) -> tuple[Bits, int]:
        return self.transitions[location][self.symbol_index(symbol)]

    def run(self, word: Iterable[str]) -> list[Bits]:
        loc = self.initial
        out = []
        for a in word:
            bits, loc = self.step(loc, a)
            out.append(bits)
        return out

    def location_after(self, word: Iterable[str]) -> int:
        loc = self.initial
        for a in word:
            loc = self.step(loc, a)[1]
        return loc

    def reachable(self) -> list[int]:
        seen = [self.initial]
        seen_set = {self.initial}
        queue = deque(seen)
        while queue:
            loc = queue.popleft()
            for _, to in self.transitions[loc]:
                if to not in seen_set:
                    seen_set.add(to)
                    seen.append(to)
                    queue.append(to)
        return seen

    def with_initial(self, location: int) -> "MealyMachine":
        return MealyMachine(self.sigma, self.propositions, location, self.transitions)

    def minimized(self) -> "MealyMachine":
        """Reachable part, with equivalent locations merged (partition refinement)."""
        reach = self.reachable()
        block = {loc: 0 for loc in reach}
        count = 1
        while True:
            signature = {
                loc: (block[loc],) + tuple((out, block[to]) for out, to in self.transitions[loc])
                for loc in reach}
            ids: dict = {}
            new_block = {loc: ids.setdefault(signature[loc], len(ids)) for loc in reach}
            if len(ids) == count:
                break
            block, count = new_block, len(ids)
        # renumber in BFS order so the initial location is 0
        order: dict[int, int] = {}
        for loc in reach:
            order.setdefault(block[loc], len(order))
        rows: list = [None] * count
        for loc in reach:
            b = order[block[loc]]
            if rows[b] is None:
                rows[b] = tuple((out, order[block[to]]) for out, to in self.transitions[loc])
        return MealyMachine(self.sigma, self.propositions, 0, tuple(rows))

    # -- serialization ----------------------------------------------------

    def to_portable(self) -> dict:
        return {
            "version": PORTABLE_VERSION,
            "sigma": list(self.sigma),
            "propositions": list(self.propositions),
            "initial": self.initial,
            "transitions": [
                [{"out": [int(b) for b in out], "to": to} for out, to in row]
                for row in self.transitions],
        }

    @classmethod
    def from_portable(cls, doc: dict) -> "MealyMachine":
        try:
            if doc.get("version") != PORTABLE_VERSION:
                raise MachineFormatError(f"unsupported machine document version {doc.get('version')!r}")
            rows = tuple(
                tuple((tuple(bool(b) for b in edge["out"]), int(edge["to"])) for edge in row)
                for row in doc["transitions"])
            return cls(tuple(doc["sigma"]), tuple(doc["propositions"]), int(doc["initial"]), rows)
        except (KeyError, TypeError, AttributeError) as exc:
            raise MachineFormatError(f"malformed machine document: {exc!r}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_portable(), sort_keys=True)

    def to_dot(self) -> str:
        lines = ["digraph mealy {", "  rankdir=LR;", '  __start [shape=point, label=""];']
        for loc in range(self.size):
            lines.append(f'  s{loc} [shape=circle, label="s{loc}"];')
        lines.append(f"  __start -> s{self.initial};")
        for loc, row in enumerate(self.transitions):
            for a, (out, to) in zip(self.sigma, row):
                bits = "".join("1" if b else "0" for b in out)
                lines.append(f'  s{loc} -> s{to} [label="{a} / {bits}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def distinguish(m1: MealyMachine, m2: MealyMachine) -> Word | None:
    """Shortest word (ties: symbol order) on which the machines' outputs differ."""
    if m1.sigma != m2.sigma:
        raise ValueError("machines have different input alphabets")
    start = (m1.initial, m2.initial)
    parent: dict[tuple[int, int], tuple[tuple[int, int], int] | None] = {start: None}
    queue = deque([start])

    def word_to(state, last_symbol):
        symbols = [last_symbol]
        while parent[state] is not None:
            state, a = parent[state]
            symbols.append(a)
        return tuple(m1.sigma[a] for a in reversed(symbols))

    while queue:
        state = queue.popleft()
        p, q = state
        for a in range(len(m1.sigma)):
            out1, t1 = m1.transitions[p][a]
            out2, t2 = m2.transitions[q][a]
            if out1 != out2:
                return word_to(state, a)
            nxt = (t1, t2)
            if nxt not in parent:
                parent[nxt] = (state, a)
                queue.append(nxt)
    return None


def random_machine(rng, n_states: int, sigma: Sequence[str], n_props: int,
                   n_outputs: int | None = None) -> MealyMachine:
    """Random total machine; outputs drawn from ``n_outputs`` distinct bit-vectors."""
    import itertools
    all_bits = list(itertools.product((False, True), repeat=n_props))
    if n_outputs is not None:
        picks = rng.choice(len(all_bits), size=min(n_outputs, len(all_bits)), replace=False)
        all_bits = [all_bits[i] for i in picks]
    rows = []
    for _ in range(n_states):
        rows.append(tuple(
            (all_bits[int(rng.integers(len(all_bits)))], int(rng.integers(n_states)))
            for _ in sigma))
    props = tuple(f"p{i}" for i in range(n_props))
    return MealyMachine(tuple(sigma), props, 0, tuple(rows))
