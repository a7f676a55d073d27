"""Bounded safety checking of a Mealy hypothesis by formula progression.

Residual obligations are kept in negation normal form as nested tuples::

    ("T",) ("F",) ("lit", index, positive) ("and", args) ("or", args)
    ("X", f) ("U", lo, hi, f, g) ("R", lo, hi, f, g)

``R`` is the dual of the bounded until, in which the left
operand must also hold at the witness position::

    f U_[i,j] g  at k  iff  exists l in [k+i, k+j]: g(l) and f(m) for all m in [k, l]
    f R_[i,j] g  at k  iff  forall l in [k+i, k+j]: g(l) or f(m) for some m in [k, l]

Conjunctions and disjunctions are flattened, deduplicated and sorted, so equal
residuals are equal tuples and the product search can prune revisits.
"""
from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .mealy import Bits, MealyMachine, Word
from .stl import Formula, Next, Not, Or, Prop, Top, Until

INF = math.inf
TRUE = ("T",)
FALSE = ("F",)

DEFAULT_STATE_CAP = 100_000


def mk_and(args) -> tuple:
    flat = set()
    for a in args:
        if a == FALSE:
            return FALSE
        if a == TRUE:
            continue
        if a[0] == "and":
            flat.update(a[1])
        else:
            flat.add(a)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return next(iter(flat))
    return ("and", tuple(sorted(flat)))


def mk_or(args) -> tuple:
    flat = set()
    for a in args:
        if a == TRUE:
            return TRUE
        if a == FALSE:
            continue
        if a[0] == "or":
            flat.update(a[1])
        else:
            flat.add(a)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return next(iter(flat))
    return ("or", tuple(sorted(flat)))


def mk_next(f) -> tuple:
    return f if f in (TRUE, FALSE) else ("X", f)


def mk_until(lo, hi, f, g) -> tuple:
    if f == FALSE or g == FALSE:
        return FALSE
    return ("U", lo, hi, f, g)


def mk_release(lo, hi, f, g) -> tuple:
    if f == TRUE or g == TRUE:
        return TRUE
    return ("R", lo, hi, f, g)


def to_nnf(f: Formula, positive: bool = True) -> tuple:
    """Negation normal form of a formula whose leaves are ``Prop``."""
    if isinstance(f, Top):
        return TRUE if positive else FALSE
    if isinstance(f, Prop):
        return ("lit", f.index, positive)
    if isinstance(f, Not):
        return to_nnf(f.arg, not positive)
    if isinstance(f, Or):
        parts = (to_nnf(f.left, positive), to_nnf(f.right, positive))
        return mk_or(parts) if positive else mk_and(parts)
    if isinstance(f, Next):
        return mk_next(to_nnf(f.arg, positive))
    if isinstance(f, Until):
        left, right = to_nnf(f.left, positive), to_nnf(f.right, positive)
        if positive:
            return mk_until(f.lo, f.hi, left, right)
        return mk_release(f.lo, f.hi, left, right)
    raise TypeError(f"cannot check {f!r}; propositionalize the formula first")


def progress(state: tuple, bits: Sequence[bool]) -> tuple:
    """Residual obligation after observing ``bits`` at the current position."""
    tag = state[0]
    if tag in ("T", "F"):
        return state
    if tag == "lit":
        return TRUE if bool(bits[state[1]]) == state[2] else FALSE
    if tag == "and":
        return mk_and(progress(a, bits) for a in state[1])
    if tag == "or":
        return mk_or(progress(a, bits) for a in state[1])
    if tag == "X":
        return state[1]
    _, lo, hi, f, g = state
    if tag == "U":
        if lo > 0:
            return mk_and((progress(f, bits), mk_until(lo - 1, hi - 1, f, g)))
        rest = mk_until(0, hi - 1, f, g) if hi >= 1 else FALSE
        return mk_and((progress(f, bits), mk_or((progress(g, bits), rest))))
    if tag == "R":
        if lo > 0:
            return mk_or((progress(f, bits), mk_release(lo - 1, hi - 1, f, g)))
        rest = mk_release(0, hi - 1, f, g) if hi >= 1 else TRUE
        return mk_or((progress(f, bits), mk_and((progress(g, bits), rest))))
    raise ValueError(f"malformed monitor state {state!r}")


class MonitorVerdict(enum.Enum):
    BAD = "bad"
    NOT_YET_BAD = "not-yet-bad"


def _as_state(f) -> tuple:
    return f if isinstance(f, tuple) else to_nnf(f)


def first_bad_index(f, trace: Sequence[Sequence[bool]]) -> int | None:
    """Index of the step at which the residual becomes false, if any."""
    state = _as_state(f)
    if state == FALSE:
        return -1
    for k, bits in enumerate(trace):
        state = progress(state, bits)
        if state == FALSE:
            return k
    return None


def boolean_monitor(f, trace: Sequence[Sequence[bool]]) -> MonitorVerdict:
    return MonitorVerdict.BAD if first_bad_index(f, trace) is not None else MonitorVerdict.NOT_YET_BAD


class CheckStatus(enum.Enum):
    NO_BAD_PREFIX = "no-bad-prefix-within-horizon"
    BAD_PREFIX = "bad-prefix"
    INCONCLUSIVE = "inconclusive"


@dataclass
class CheckResult:
    status: CheckStatus
    word: Word | None = None
    outputs: list[Bits] = field(default_factory=list)
    explored: int = 0

    @property
    def found(self) -> bool:
        return self.status is CheckStatus.BAD_PREFIX


def find_bad_prefix(machine: MealyMachine, f, horizon: int,
                    state_cap: int = DEFAULT_STATE_CAP) -> CheckResult:
    """Breadth-first search of the machine x monitor product for a bad prefix.

    The first bad word found is a shortest one; among those, the smallest in
    the machine's declared symbol order.
    """
    start_state = _as_state(f)
    if start_state == FALSE:
        return CheckResult(CheckStatus.BAD_PREFIX, (), [], 1)
    start = (machine.initial, start_state)
    parent: dict = {start: None}
    depth = {start: 0}
    queue = deque([start])
    cache: dict = {}

    def trace_back(node, a, bits):
        symbols, outs = [a], [bits]
        while parent[node] is not None:
            node, sym, out = parent[node]
            symbols.append(sym)
            outs.append(out)
        return (tuple(machine.sigma[s] for s in reversed(symbols)), list(reversed(outs)))

    while queue:
        node = queue.popleft()
        d = depth[node]
        if d >= horizon:
            continue
        loc, residual = node
        for a, (bits, target) in enumerate(machine.transitions[loc]):
            key = (residual, bits)
            nxt_res = cache.get(key)
            if nxt_res is None:
                nxt_res = cache[key] = progress(residual, bits)
            if nxt_res == FALSE:
                word, outs = trace_back(node, a, bits)
                return CheckResult(CheckStatus.BAD_PREFIX, word, outs, len(parent))
            nxt = (target, nxt_res)
            if nxt in parent:
                continue
            if len(parent) >= state_cap:
                return CheckResult(CheckStatus.INCONCLUSIVE, explored=len(parent))
            parent[nxt] = (node, a, bits)
            depth[nxt] = d + 1
            queue.append(nxt)
    return CheckResult(CheckStatus.NO_BAD_PREFIX, explored=len(parent))
