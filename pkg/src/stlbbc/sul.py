"""The system under learning: plants, adapters, and a prefix cache.

``SystemOracle`` composes input mapper, adapter and output mapper into a
membership oracle over abstract words.  Every simulation goes through a
prefix tree keyed by input symbols, so repeated or extended queries only step
the plant for the part that is new.
"""
from __future__ import annotations

import logging
import queue
import subprocess
import threading
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .abstraction import InputMapper, OutputMapper
from .learner import MembershipOracle
from .mealy import Bits, Word
from .stl import Trace

log = logging.getLogger(__name__)


class AdapterError(RuntimeError):
    """The system could not be simulated (protocol failure, crash, timeout)."""


class NondeterminismError(AdapterError):
    pass


class BudgetExhausted(RuntimeError):
    pass


class Timeout(RuntimeError):
    """Wall-clock limit reached."""


# -- built-in automatic transmission surrogate -------------------------------

@dataclass(frozen=True)
class PlantParams:
    alpha: tuple[float, ...] = (6.0, 5.0, 4.5, 5.0)
    beta: float = 8.0
    gamma: float = 0.01
    ratios: tuple[float, ...] = (120.0, 80.0, 55.0, 40.0)
    upshift: float = 4500.0
    downshift: float = 1000.0
    cooldown: int = 2
    substeps: int = 10
    dt: float = 0.1
    throttle_max: float = 100.0
    brake_max: float = 325.0

    @classmethod
    def from_dict(cls, values: dict) -> "PlantParams":
        known = set(cls.__dataclass_fields__)
        unknown = set(values) - known
        if unknown:
            raise ValueError(f"unknown plant parameters: {sorted(unknown)}")
        conv = {k: tuple(float(x) for x in v) if isinstance(v, (list, tuple)) else v
                for k, v in values.items()}
        return replace(cls(), **conv)


DEFAULT_PARAMS = PlantParams()


@dataclass(frozen=True)
class AtState:
    v: float = 0.0
    g: int = 1
    cooldown: int = 0


def at_step(s: AtState, throttle: float, brake: float,
            params: PlantParams = DEFAULT_PARAMS) -> tuple[AtState, tuple[float, float, float]]:
    """One control step; returns the new state and (velocity, rotation, gear)."""
    if not 0.0 <= throttle <= params.throttle_max:
        raise ValueError(f"throttle {throttle} outside [0, {params.throttle_max}]")
    if not 0.0 <= brake <= params.brake_max:
        raise ValueError(f"brake {brake} outside [0, {params.brake_max}]")
    g = s.g
    accel = params.alpha[g - 1] * throttle / params.throttle_max
    decel = params.beta * brake / params.brake_max
    v = s.v
    for _ in range(params.substeps):
        v = max(0.0, v + params.dt * (accel - decel - params.gamma * v))
    omega = v * params.ratios[g - 1]
    cooldown = s.cooldown
    if cooldown == 0:
        if omega >= params.upshift and g < len(params.ratios):
            g, cooldown = g + 1, params.cooldown
        elif omega <= params.downshift and g > 1:
            g, cooldown = g - 1, params.cooldown
    else:
        cooldown -= 1
    return AtState(v, g, cooldown), (v, v * params.ratios[g - 1], float(g))


def simulate_batch(inputs: np.ndarray, params: PlantParams = DEFAULT_PARAMS) -> np.ndarray:
    """Vectorized plant run from rest.

    ``inputs`` has shape (N, L, 2) holding (throttle, brake); the result has
    shape (N, L, 3) holding (velocity, rotation, gear).
    """
    inputs = np.asarray(inputs, dtype=float)
    n, length, _ = inputs.shape
    alpha = np.asarray(params.alpha)
    ratios = np.asarray(params.ratios)
    top = len(ratios)
    v = np.zeros(n)
    g = np.ones(n, dtype=int)
    cd = np.zeros(n, dtype=int)
    out = np.empty((n, length, 3))
    for k in range(length):
        thr, brk = inputs[:, k, 0], inputs[:, k, 1]
        accel = alpha[g - 1] * thr / params.throttle_max
        decel = params.beta * brk / params.brake_max
        for _ in range(params.substeps):
            v = np.maximum(0.0, v + params.dt * (accel - decel - params.gamma * v))
        omega = v * ratios[g - 1]
        ready = cd == 0
        up = ready & (omega >= params.upshift) & (g < top)
        down = ready & ~up & (omega <= params.downshift) & (g > 1)
        g = g + up - down
        cd = np.where(up | down, params.cooldown, np.where(ready, 0, cd - 1))
        out[:, k, 0] = v
        out[:, k, 1] = v * ratios[g - 1]
        out[:, k, 2] = g
    return out


# -- adapters -------------------------------------------------------------------

class SystemAdapter:
    """reset/step interface to a deterministic, causal system."""

    parallel = False
    input_variables: tuple[str, ...] = ()
    output_variables: tuple[str, ...] = ()
    discrete: frozenset[str] = frozenset()

    def reset(self) -> None:
        raise NotImplementedError

    def step(self, inputs: Sequence[float]) -> tuple[float, ...]:
        raise NotImplementedError

    # Adapters that can resume from a saved state override both.
    def snapshot(self):
        return None

    def restore(self, snap) -> None:
        raise NotImplementedError

    def close(self) -> None:
        pass


class AutoTransmission(SystemAdapter):
    parallel = True

    def __init__(self, params: PlantParams = DEFAULT_PARAMS,
                 input_variables=("throttle", "brake"),
                 output_variables=("velocity", "rotation", "gear")):
        self.params = params
        self.input_variables = tuple(input_variables)
        self.output_variables = tuple(output_variables)
        if len(self.input_variables) != 2 or len(self.output_variables) != 3:
            raise ValueError("the transmission plant has 2 inputs and 3 outputs")
        self.discrete = frozenset({self.output_variables[2]})
        self.state = AtState()
        self.steps = 0

    def reset(self) -> None:
        self.state = AtState()

    def step(self, inputs):
        self.steps += 1
        self.state, out = at_step(self.state, float(inputs[0]), float(inputs[1]), self.params)
        return out

    def snapshot(self):
        return self.state

    def restore(self, snap) -> None:
        self.state = snap


class ExternalProcessAdapter(SystemAdapter):
    """Child process speaking a line protocol on stdin/stdout.

    ``RESET`` is answered by ``OK``; ``STEP x1 ... xn`` by ``Y y1 ... ym``.
    """

    parallel = False

    def __init__(self, command: Sequence[str], input_variables: Sequence[str],
                 output_variables: Sequence[str], discrete: Sequence[str] = (),
                 timeout: float = 30.0):
        self.command = list(command)
        self.input_variables = tuple(input_variables)
        self.output_variables = tuple(output_variables)
        self.discrete = frozenset(discrete)
        self.timeout = timeout
        self.steps = 0
        self._proc: subprocess.Popen | None = None
        self._lines: queue.Queue = queue.Queue()
        self._lock = threading.Lock()

    def _start(self) -> None:
        try:
            self._proc = subprocess.Popen(
                self.command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                text=True, encoding="utf-8", bufsize=1)
        except OSError as exc:
            raise AdapterError(f"cannot start {self.command[0]!r}: {exc}") from exc
        self._lines = queue.Queue()
        threading.Thread(target=self._pump, args=(self._proc.stdout, self._lines), daemon=True).start()

    @staticmethod
    def _pump(stream, lines: queue.Queue) -> None:
        for line in stream:
            lines.put(line)
        lines.put(None)

    def _exchange(self, request: str) -> str:
        if self._proc is None or self._proc.poll() is not None:
            if self._proc is not None:
                raise AdapterError(f"process exited with status {self._proc.returncode}")
            self._start()
        try:
            self._proc.stdin.write(request + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise AdapterError(f"process closed its input: {exc}") from exc
        try:
            line = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            raise AdapterError(f"no response within {self.timeout} s") from None
        if line is None:
            self._proc.wait()
            raise AdapterError(f"process exited with status {self._proc.returncode}")
        return line.rstrip("\r\n")

    def reset(self) -> None:
        with self._lock:
            if self._proc is not None and self._proc.poll() is not None:
                self._proc = None  # restart a process that ended cleanly between runs
            reply = self._exchange("RESET")
            if reply != "OK":
                raise AdapterError(f"protocol error: expected 'OK' after RESET, got {reply!r}")

    def step(self, inputs):
        with self._lock:
            self.steps += 1
            reply = self._exchange("STEP " + " ".join(repr(float(x)) for x in inputs))
            parts = reply.split()
            if not parts or parts[0] != "Y":
                raise AdapterError(f"protocol error: expected 'Y ...', got {reply!r}")
            if len(parts) - 1 != len(self.output_variables):
                raise AdapterError(
                    f"protocol error: expected {len(self.output_variables)} outputs, got {len(parts) - 1}")
            try:
                return tuple(float(x) for x in parts[1:])
            except ValueError:
                raise AdapterError(f"protocol error: malformed number in {reply!r}") from None

    def close(self) -> None:
        if self._proc is not None:
            try:
                self._proc.stdin.close()
                self._proc.wait(timeout=5)
            except Exception:  # noqa: BLE001 - best effort shutdown
                self._proc.kill()
            self._proc = None


# -- cache and budget -----------------------------------------------------------

@dataclass
class SimulationBudget:
    """Limit on fresh simulation runs shared by all consumers of one oracle."""

    max_runs: int | None = None
    used: int = 0

    @property
    def remaining(self) -> float:
        return float("inf") if self.max_runs is None else self.max_runs - self.used

    def charge(self) -> None:
        if self.max_runs is not None and self.used >= self.max_runs:
            raise BudgetExhausted(f"simulation budget of {self.max_runs} runs exhausted")
        self.used += 1


@dataclass
class _Node:
    outputs: tuple[float, ...] | None = None
    bits: Bits | None = None
    snap: object = None
    children: dict = field(default_factory=dict)


class TraceCache:
    def __init__(self):
        self.root = _Node()
        self.runs = 0
        self.steps = 0
        self.hits = 0
        self.nodes = 1

    def walk(self, word: Word) -> list[_Node]:
        """Cached nodes along the longest cached prefix of ``word``."""
        path = []
        node = self.root
        for a in word:
            node = node.children.get(a)
            if node is None:
                break
            path.append(node)
        return path


class SystemOracle(MembershipOracle):
    """Membership oracle for a real-valued system behind input/output mappers."""

    def __init__(self, adapter: SystemAdapter, inputs: InputMapper, outputs: OutputMapper,
                 budget: SimulationBudget | None = None):
        super().__init__(inputs.sigma, outputs.labels)
        if tuple(inputs.variables) != tuple(adapter.input_variables):
            raise ValueError("input mapper and adapter disagree on input variables")
        self.adapter = adapter
        self.input_mapper = inputs
        self.output_mapper = outputs
        self.budget = budget if budget is not None else SimulationBudget()
        self.cache = TraceCache()
        self.variables = tuple(adapter.input_variables) + tuple(adapter.output_variables)
        self._sim_lock = threading.RLock()
        self._atom_cols = [self.variables.index(a.var) for a in outputs.predicates]

    @property
    def parallel(self) -> bool:
        return self.adapter.parallel

    @property
    def runs(self) -> int:
        return self.cache.runs

    @property
    def steps(self) -> int:
        return self.cache.steps

    def _bits(self, row: Sequence[float]) -> Bits:
        return tuple(a.holds(row[c]) for a, c in zip(self.output_mapper.predicates, self._atom_cols))

    def _extend(self, word: Word) -> list[_Node]:
        path = self.cache.walk(word)
        if len(path) == len(word):
            self.cache.hits += 1
            return path
        self.budget.charge()
        self.cache.runs += 1
        adapter = self.adapter
        start = len(path)
        if path and path[-1].snap is not None:
            adapter.restore(path[-1].snap)
        else:
            adapter.reset()
            for i, node in enumerate(path):
                out = self._step(i, word[i])
                if out != node.outputs:
                    raise NondeterminismError(
                        f"step {i}: replay produced {out}, cached {node.outputs}")
        parent = path[-1] if path else self.cache.root
        for i in range(start, len(word)):
            out = self._step(i, word[i])
            row = self.input_mapper(word[i]) + out
            node = _Node(out, self._bits(row), adapter.snapshot())
            parent.children[word[i]] = node
            self.cache.nodes += 1
            path.append(node)
            parent = node
        return path

    def _step(self, index: int, symbol: str) -> tuple[float, ...]:
        try:
            out = tuple(float(x) for x in self.adapter.step(self.input_mapper(symbol)))
        except AdapterError as exc:
            raise AdapterError(f"step {index}: {exc}") from exc
        self.cache.steps += 1
        if len(out) != len(self.adapter.output_variables):
            raise AdapterError(f"step {index}: adapter returned {len(out)} outputs")
        return out

    def simulate(self, word: Sequence[str]) -> Trace:
        """Concrete trace (inputs then outputs per row) of an abstract word."""
        word = tuple(word)
        with self._sim_lock:
            path = self._extend(word)
        rows = [self.input_mapper(a) + node.outputs for a, node in zip(word, path)]
        return Trace(self.variables, np.array(rows, dtype=float).reshape(len(rows), len(self.variables)))

    def abstract_outputs(self, word: Sequence[str]) -> list[Bits]:
        word = tuple(word)
        with self._sim_lock:
            path = self._extend(word)
        return [node.bits for node in path]

    def _answer(self, word: Word) -> list[Bits]:
        before = self.cache.runs
        out = self.abstract_outputs(word)
        if self.cache.runs != before:
            with self._lock:
                self.misses += 1
        return out

    def counters(self) -> dict[str, int]:
        return {"runs": self.cache.runs, "steps": self.cache.steps, "cache_hits": self.cache.hits,
                "membership_queries": self.queries}
