"""Discrete-time STL: syntax, parsing, horizon, and finite-trace robustness.

Formulas are immutable trees over six node kinds (``Top``, ``Atom``, ``Not``,
``Or``, ``Next``, ``Until``) plus ``Prop`` leaves used once a formula has been
rewritten over atomic propositions.  All derived operators are desugared by
the parser.

Finite-trace robustness is computed as an interval per position.  A trace of
length ``n`` is evaluated on ``n + 1`` positions where index ``n`` stands for
every position past the end: atoms there are ``[-inf, +inf]`` and, by
induction, every formula takes the same value at all positions ``>= n``.
"""
from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

INF = math.inf

COMPARATORS = (">", "<", "==", "!=")
EQUALITY_OPS = ("==", "!=")


class FormulaError(ValueError):
    """Raised for malformed or ill-typed formulas."""


class StlSyntaxError(FormulaError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class HorizonError(ValueError):
    """Raised when a trace is too short for point robustness."""


# ---------------------------------------------------------------------------
# Syntax tree


class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True, eq=True, repr=False)
class Top(Formula):
    def __repr__(self):
        return "Top()"


@dataclass(frozen=True, repr=False)
class Atom(Formula):
    var: str
    op: str
    const: float

    def __repr__(self):
        return f"Atom({self.var!r}, {self.op!r}, {self.const!r})"

    def holds(self, value: float) -> bool:
        if self.op == ">":
            return value > self.const
        if self.op == "<":
            return value < self.const
        if self.op == "==":
            return value == self.const
        return value != self.const


@dataclass(frozen=True, repr=False)
class Prop(Formula):
    """Leaf referring to bit ``index`` of an abstract output bit-vector."""

    index: int
    label: str = ""

    def __repr__(self):
        return f"Prop({self.index}, {self.label!r})"


@dataclass(frozen=True, repr=False)
class Not(Formula):
    arg: Formula

    def __repr__(self):
        return f"Not({self.arg!r})"


@dataclass(frozen=True, repr=False)
class Or(Formula):
    left: Formula
    right: Formula

    def __repr__(self):
        return f"Or({self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False)
class Next(Formula):
    arg: Formula

    def __repr__(self):
        return f"Next({self.arg!r})"


@dataclass(frozen=True, repr=False)
class Until(Formula):
    lo: int
    hi: float  # int or INF
    left: Formula
    right: Formula

    def __post_init__(self):
        if self.lo < 0 or self.lo > self.hi:
            raise FormulaError(f"invalid Until interval [{self.lo},{self.hi}]")

    def __repr__(self):
        return f"Until({self.lo}, {self.hi}, {self.left!r}, {self.right!r})"


TOP = Top()


# Sugar constructors.  Double negations are cancelled; every other rewrite is
# the textbook definition.

def neg(f: Formula) -> Formula:
    return f.arg if isinstance(f, Not) else Not(f)


def bottom() -> Formula:
    return Not(TOP)


def conj(a: Formula, b: Formula) -> Formula:
    return neg(Or(neg(a), neg(b)))


def implies(a: Formula, b: Formula) -> Formula:
    return Or(neg(a), b)


def eventually(f: Formula, lo: int = 0, hi: float = INF) -> Formula:
    return Until(lo, hi, TOP, f)


def always(f: Formula, lo: int = 0, hi: float = INF) -> Formula:
    return neg(eventually(neg(f), lo, hi))


def until(a: Formula, b: Formula, lo: int = 0, hi: float = INF) -> Formula:
    return Until(lo, hi, a, b)


# ---------------------------------------------------------------------------
# Structural queries


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, (Not, Next)):
        return (f.arg,)
    if isinstance(f, (Or, Until)):
        return (f.left, f.right)
    return ()


def subformulas(f: Formula) -> Iterator[Formula]:
    """Pre-order traversal."""
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(reversed(children(g)))


def atoms(f: Formula) -> list[Atom]:
    """Distinct atoms in order of first (left-to-right) appearance."""
    seen: dict[Atom, None] = {}
    for g in subformulas(f):
        if isinstance(g, Atom):
            seen.setdefault(g)
    return list(seen)


def horizon(f: Formula) -> float:
    """Largest relative time index ``f`` can inspect (``INF`` if unbounded)."""
    if isinstance(f, (Top, Atom, Prop)):
        return 0
    if isinstance(f, Not):
        return horizon(f.arg)
    if isinstance(f, Or):
        return max(horizon(f.left), horizon(f.right))
    if isinstance(f, Next):
        return 1 + horizon(f.arg)
    if isinstance(f, Until):
        return f.hi + max(horizon(f.left), horizon(f.right))
    raise TypeError(f"not a formula: {f!r}")


def map_leaves(f: Formula, fn: Callable[[Formula], Formula]) -> Formula:
    """Rebuild ``f`` with every ``Atom``/``Prop`` leaf replaced by ``fn(leaf)``."""
    if isinstance(f, (Atom, Prop)):
        return fn(f)
    if isinstance(f, Top):
        return f
    if isinstance(f, Not):
        return Not(map_leaves(f.arg, fn))
    if isinstance(f, Next):
        return Next(map_leaves(f.arg, fn))
    if isinstance(f, Or):
        return Or(map_leaves(f.left, fn), map_leaves(f.right, fn))
    if isinstance(f, Until):
        return Until(f.lo, f.hi, map_leaves(f.left, fn), map_leaves(f.right, fn))
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Printing


def _num(x: float) -> str:
    return repr(float(x))


def _bound(x: float) -> str:
    return "inf" if x == INF else str(int(x))


def atom_text(a: Atom) -> str:
    return f"{a.var} {a.op} {_num(a.const)}"


def to_text(f: Formula) -> str:
    """Fully parenthesised core syntax; ``parse_formula`` reads it back."""
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Atom):
        return atom_text(f)
    if isinstance(f, Prop):
        return f"p{f.index}"
    if isinstance(f, Not):
        return f"!({to_text(f.arg)})"
    if isinstance(f, Next):
        return f"X ({to_text(f.arg)})"
    if isinstance(f, Or):
        return f"({to_text(f.left)} || {to_text(f.right)})"
    if isinstance(f, Until):
        return (f"({to_text(f.left)} U_[{f.lo},{_bound(f.hi)}] "
                f"{to_text(f.right)})")
    raise TypeError(f"not a formula: {f!r}")


def _interval_suffix(lo: int, hi: float) -> str:
    return "" if (lo == 0 and hi == INF) else f"_[{lo},{_bound(hi)}]"


def pretty(f: Formula) -> str:
    """Human-oriented printing that re-introduces G, F, &&, ->, >=, <=."""
    if isinstance(f, Not):
        g = f.arg
        if isinstance(g, Top):
            return "false"
        if isinstance(g, Atom) and g.op in "<>":
            flipped = ">=" if g.op == "<" else "<="
            return f"{g.var} {flipped} {_num(g.const)}"
        if isinstance(g, Until) and isinstance(g.left, Top) and isinstance(g.right, Not):
            return f"G{_interval_suffix(g.lo, g.hi)} ({pretty(g.right.arg)})"
        if isinstance(g, Or) and isinstance(g.left, Not) and isinstance(g.right, Not):
            return f"({pretty(g.left.arg)} && {pretty(g.right.arg)})"
        return f"!({pretty(g)})"
    if isinstance(f, Or) and isinstance(f.left, Not):
        return f"({pretty(f.left.arg)} -> {pretty(f.right)})"
    if isinstance(f, Until) and isinstance(f.left, Top):
        return f"F{_interval_suffix(f.lo, f.hi)} ({pretty(f.right)})"
    if isinstance(f, Or):
        return f"({pretty(f.left)} || {pretty(f.right)})"
    if isinstance(f, Next):
        return f"X ({pretty(f.arg)})"
    if isinstance(f, Until):
        return f"({pretty(f.left)} U{_interval_suffix(f.lo, f.hi)} {pretty(f.right)})"
    return to_text(f)


# ---------------------------------------------------------------------------
# Parsing

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<temporal>G|F|U|X|\[\]|<>)
        (?:_\[\s*(?P<ilo>\d+)\s*,\s*(?P<ihi>\d+|inf)\s*\])?(?![A-Za-z0-9_])
  | (?P<num>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>->|&&|\|\||>=|<=|==|!=|[<>!()])
""", re.VERBOSE)


@dataclass
class _Token:
    kind: str
    value: str
    pos: int
    interval: tuple[int, float] | None = None


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise StlSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        if m.group("ws"):
            pos = m.end()
            continue
        if m.group("temporal"):
            op = {"[]": "G", "<>": "F"}.get(m.group("temporal"), m.group("temporal"))
            interval = None
            if m.group("ilo") is not None:
                ihi = m.group("ihi")
                interval = (int(m.group("ilo")), INF if ihi == "inf" else int(ihi))
            tokens.append(_Token("temporal", op, pos, interval))
        elif m.group("num"):
            tokens.append(_Token("num", m.group("num"), pos))
        elif m.group("ident"):
            tokens.append(_Token("ident", m.group("ident"), pos))
        else:
            tokens.append(_Token("op", m.group("op"), pos))
        pos = m.end()
    tokens.append(_Token("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: Mapping[str, bool] | None):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.variables = variables

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message: str, tok: _Token | None = None):
        tok = tok or self.peek()
        found = "end of input" if tok.kind == "eof" else repr(tok.value)
        raise StlSyntaxError(f"{message}, found {found}", tok.pos, self.text)

    def expect_op(self, value: str) -> _Token:
        tok = self.peek()
        if tok.kind != "op" or tok.value != value:
            self.error(f"expected {value!r}")
        return self.advance()

    def parse(self) -> Formula:
        f = self.implication()
        if self.peek().kind != "eof":
            self.error("unexpected token")
        return f

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.peek().kind == "op" and self.peek().value == "->":
            self.advance()
            return implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.peek().kind == "op" and self.peek().value == "||":
            self.advance()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.until()
        while self.peek().kind == "op" and self.peek().value == "&&":
            self.advance()
            f = conj(f, self.until())
        return f

    def until(self) -> Formula:
        left = self.unary()
        tok = self.peek()
        if tok.kind == "temporal" and tok.value == "U":
            self.advance()
            lo, hi = self.check_interval(tok)
            return Until(lo, hi, left, self.until())
        return left

    def check_interval(self, tok: _Token) -> tuple[int, float]:
        if tok.interval is None:
            return 0, INF
        lo, hi = tok.interval
        if lo > hi:
            raise StlSyntaxError(f"interval [{lo},{_bound(hi)}] has lower bound above upper bound",
                                 tok.pos, self.text)
        return lo, hi

    def unary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "op" and tok.value == "!":
            self.advance()
            return neg(self.unary())
        if tok.kind == "temporal" and tok.value != "U":
            self.advance()
            if tok.value == "X":
                if tok.interval is not None:
                    self.error("X takes no interval", tok)
                return Next(self.unary())
            lo, hi = self.check_interval(tok)
            arg = self.unary()
            return always(arg, lo, hi) if tok.value == "G" else eventually(arg, lo, hi)
        return self.primary()

    def primary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "op" and tok.value == "(":
            self.advance()
            f = self.implication()
            self.expect_op(")")
            return f
        if tok.kind == "ident":
            if tok.value == "true":
                self.advance()
                return TOP
            if tok.value == "false":
                self.advance()
                return bottom()
            return self.atom()
        self.error("expected a formula")

    def atom(self) -> Formula:
        name_tok = self.advance()
        name = name_tok.value
        op_tok = self.peek()
        if op_tok.kind != "op" or op_tok.value not in (">", "<", ">=", "<=", "==", "!="):
            self.error("expected a comparison operator")
        self.advance()
        num_tok = self.peek()
        if num_tok.kind != "num":
            self.error("expected a numeric constant")
        self.advance()
        const = float(num_tok.value)
        if self.variables is not None:
            if name not in self.variables:
                raise FormulaError(f"undeclared variable {name!r} at position {name_tok.pos}")
            if op_tok.value in EQUALITY_OPS and not self.variables[name]:
                raise FormulaError(
                    f"{op_tok.value!r} used on continuous variable {name!r} "
                    f"at position {op_tok.pos}; declare it discrete")
        op = op_tok.value
        if op == ">=":
            return Not(Atom(name, "<", const))
        if op == "<=":
            return Not(Atom(name, ">", const))
        return Atom(name, op, const)


def parse_formula(text: str, variables: Mapping[str, bool] | Iterable[str] | None = None) -> Formula:
    """Parse ``text`` into a desugared formula.

    ``variables`` maps each declared output variable to a flag telling whether
    it is discrete (only discrete variables admit ``==``/``!=``).  An iterable
    of names declares continuous variables; ``None`` skips declaration checks.
    """
    if variables is not None and not isinstance(variables, Mapping):
        variables = {name: False for name in variables}
    return _Parser(text, variables).parse()


# ---------------------------------------------------------------------------
# Traces


@dataclass(frozen=True)
class Trace:
    """Finite signal: ``values[k, i]`` is variable ``variables[i]`` at step ``k``."""

    variables: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).reshape(-1, len(self.variables))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "variables", tuple(self.variables))

    @classmethod
    def from_rows(cls, rows: Sequence[Mapping[str, float]], variables: Sequence[str] | None = None) -> "Trace":
        if variables is None:
            variables = tuple(rows[0]) if rows else ()
        data = np.array([[float(row[v]) for v in variables] for row in rows], dtype=float)
        return cls(tuple(variables), data.reshape(len(rows), len(variables)))

    def __len__(self) -> int:
        return self.values.shape[0]

    def column(self, var: str) -> np.ndarray:
        try:
            return self.values[:, self.variables.index(var)]
        except ValueError:
            raise KeyError(f"trace has no variable {var!r}") from None

    def rows(self) -> list[dict[str, float]]:
        return [dict(zip(self.variables, map(float, row))) for row in self.values]

    def prefix(self, n: int) -> "Trace":
        return Trace(self.variables, self.values[:n])

    def append(self, row: Mapping[str, float]) -> "Trace":
        extra = np.array([[float(row[v]) for v in self.variables]])
        return Trace(self.variables, np.vstack([self.values, extra]))


# ---------------------------------------------------------------------------
# Intervals over the extended reals


@dataclass(frozen=True)
class RobustInterval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    def __neg__(self) -> "RobustInterval":
        return RobustInterval(-self.hi, -self.lo)

    def max(self, other: "RobustInterval") -> "RobustInterval":
        return RobustInterval(max(self.lo, other.lo), max(self.hi, other.hi))

    def min(self, other: "RobustInterval") -> "RobustInterval":
        return RobustInterval(min(self.lo, other.lo), min(self.hi, other.hi))

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def issubset(self, other: "RobustInterval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def as_list(self) -> list[float]:
        return [self.lo, self.hi]


# ---------------------------------------------------------------------------
# Interval evaluation engine
#
# Every subformula evaluates to a pair of arrays (lo, hi) of shape
# (n + 1, *batch); row n is the past-the-end value.  Only negate/min/max are
# applied, so lo and hi are computed independently.

Leaf = Callable[[Formula], "tuple[np.ndarray, np.ndarray]"]


def _shift(a: np.ndarray, d: int) -> np.ndarray:
    """Row k of the result is row min(k + d, n) of ``a``."""
    n = a.shape[0] - 1
    if d == 0:
        return a
    idx = np.minimum(np.arange(n + 1) + d, n)
    return a[idx]


def _until(lo: int, hi: float, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """max_{l in [k+lo, k+hi]} min(right[l], min_{m in [k, l]} left[m]) per row k."""
    n = left.shape[0] - 1
    d_lo = min(lo, n)
    d_hi = n if hi == INF else min(int(hi), n)
    running = left.copy()
    best = None
    for d in range(0, d_hi + 1):
        if d > 0:
            running = np.minimum(running, _shift(left, d))
        if d >= d_lo:
            term = np.minimum(_shift(right, d), running)
            best = term if best is None else np.maximum(best, term)
    return best


def evaluate_intervals(f: Formula, n: int, leaf: Leaf, batch: tuple[int, ...] = ()) -> tuple[np.ndarray, np.ndarray]:
    memo: dict[Formula, tuple[np.ndarray, np.ndarray]] = {}

    def ev(g: Formula):
        if g in memo:
            return memo[g]
        if isinstance(g, Top):
            full = np.full((n + 1,) + batch, INF)
            res = (full, full)
        elif isinstance(g, (Atom, Prop)):
            res = leaf(g)
        elif isinstance(g, Not):
            lo, hi = ev(g.arg)
            res = (-hi, -lo)
        elif isinstance(g, Or):
            a, b = ev(g.left), ev(g.right)
            res = (np.maximum(a[0], b[0]), np.maximum(a[1], b[1]))
        elif isinstance(g, Next):
            lo, hi = ev(g.arg)
            res = (_shift(lo, 1), _shift(hi, 1))
        elif isinstance(g, Until):
            a, b = ev(g.left), ev(g.right)
            res = (_until(g.lo, g.hi, a[0], b[0]), _until(g.lo, g.hi, a[1], b[1]))
        else:
            raise TypeError(f"not a formula: {g!r}")
        memo[g] = res
        return res

    return ev(f)


def _pad(values: np.ndarray, lo_fill: float, hi_fill: float) -> tuple[np.ndarray, np.ndarray]:
    tail_shape = (1,) + values.shape[1:]
    lo = np.concatenate([values, np.full(tail_shape, lo_fill)])
    hi = np.concatenate([values, np.full(tail_shape, hi_fill)])
    return lo, hi


def atom_robustness(atom: Atom, column: np.ndarray, eq_margin: float = 1.0) -> np.ndarray:
    if atom.op == ">":
        return column - atom.const
    if atom.op == "<":
        return atom.const - column
    truth = column == atom.const
    if atom.op == "!=":
        truth = ~truth
    return np.where(truth, eq_margin, -eq_margin)


def atom_truth(atom: Atom, column: np.ndarray) -> np.ndarray:
    if atom.op == ">":
        return column > atom.const
    if atom.op == "<":
        return column < atom.const
    if atom.op == "==":
        return column == atom.const
    return column != atom.const


def robust_leaf(columns: Mapping[str, np.ndarray], eq_margin: float = 1.0) -> Leaf:
    def leaf(g):
        if not isinstance(g, Atom):
            raise FormulaError(f"cannot evaluate {g!r} on a concrete trace")
        if g.var not in columns:
            raise KeyError(f"trace has no variable {g.var!r}")
        return _pad(atom_robustness(g, np.asarray(columns[g.var], dtype=float), eq_margin), -INF, INF)
    return leaf


def boolean_leaf(columns: Mapping[str, np.ndarray] | None = None, bits: np.ndarray | None = None) -> Leaf:
    """Three-valued leaves: +1 true, -1 false, [-1, +1] past the end."""
    def leaf(g):
        if isinstance(g, Atom):
            truth = atom_truth(g, np.asarray(columns[g.var], dtype=float))
        elif isinstance(g, Prop):
            truth = bits[:, g.index]
        else:
            raise TypeError(g)
        return _pad(np.where(truth, 1.0, -1.0), -1.0, 1.0)
    return leaf


def _columns(trace: Trace) -> dict[str, np.ndarray]:
    return {v: trace.values[:, i] for i, v in enumerate(trace.variables)}


def fin_robust(f: Formula, trace: Trace, k: int = 0, eq_margin: float = 1.0) -> RobustInterval:
    """Inductive over-approximation of the robust satisfaction interval at ``k``."""
    n = len(trace)
    lo, hi = evaluate_intervals(f, n, robust_leaf(_columns(trace), eq_margin))
    k = min(k, n)
    return RobustInterval(float(lo[k]), float(hi[k]))


def fin_robust_batch(f: Formula, columns: Mapping[str, np.ndarray], eq_margin: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate at position 0 over a batch: each column has shape (n, N)."""
    first = next(iter(columns.values()))
    n, batch = first.shape[0], first.shape[1:]
    lo, hi = evaluate_intervals(f, n, robust_leaf(columns, eq_margin), batch)
    return lo[0], hi[0]


def point_robust(f: Formula, trace: Trace, k: int = 0, eq_margin: float = 1.0) -> float:
    """Robustness of ``f`` at ``k``; the trace must cover the formula's horizon."""
    h = horizon(f)
    if not h + k < len(trace):
        raise HorizonError(f"horizon exceeds trace: need more than {h} + {k} steps, have {len(trace)}")
    interval = fin_robust(f, trace, k, eq_margin)
    assert interval.is_point, interval
    return interval.lo


class Verdict(enum.Enum):
    VIOLATED = "violated"
    SATISFIED = "satisfied"
    UNKNOWN = "unknown"


def _classify(lo: float, hi: float) -> Verdict:
    if hi < 0:
        return Verdict.VIOLATED
    if lo > 0:
        return Verdict.SATISFIED
    return Verdict.UNKNOWN


def verdict(f: Formula, trace: Trace, eq_margin: float = 1.0) -> Verdict:
    interval = fin_robust(f, trace, 0, eq_margin)
    return _classify(interval.lo, interval.hi)


def boolean_verdict(f: Formula, trace: Trace) -> Verdict:
    """Three-valued Boolean verdict of a formula over atoms on a concrete trace."""
    lo, hi = evaluate_intervals(f, len(trace), boolean_leaf(columns=_columns(trace)))
    return _classify(float(lo[0]), float(hi[0]))


def abstract_verdict(f: Formula, bits: np.ndarray | Sequence[Sequence[bool]]) -> Verdict:
    """Three-valued verdict of a formula over ``Prop`` leaves on an abstract trace."""
    bits = np.asarray(bits, dtype=bool)
    n = bits.shape[0]
    if n == 0:
        bits = bits.reshape(0, max(_max_prop(f) + 1, 0))
    lo, hi = evaluate_intervals(f, n, boolean_leaf(bits=bits))
    return _classify(float(lo[0]), float(hi[0]))


def abstract_verdict_batch(f: Formula, bits: np.ndarray) -> np.ndarray:
    """Verdicts for a batch of abstract traces, ``bits`` of shape (n, P, N).

    Returns an int array: -1 violated, 1 satisfied, 0 unknown.
    """
    n, batch = bits.shape[0], bits.shape[2:]
    lo, hi = evaluate_intervals(f, n, boolean_leaf(bits=bits), batch)
    return np.where(hi[0] < 0, -1, np.where(lo[0] > 0, 1, 0))


def _max_prop(f: Formula) -> int:
    return max((g.index for g in subformulas(f) if isinstance(g, Prop)), default=-1)
