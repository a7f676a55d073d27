"""Specification families for the transmission surrogate and a random-search oracle.

The families keep the shapes of the classic transmission benchmarks with
thresholds scaled to the surrogate plant, whose top speed after 30 steps of
full throttle is about 132.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_SYMBOLS
from .stl import fin_robust_batch, parse_formula
from .sul import DEFAULT_PARAMS, PlantParams, simulate_batch

VARIABLES = {"throttle": False, "brake": False, "velocity": False, "rotation": False, "gear": True}


@dataclass(frozen=True)
class Family:
    name: str
    template: str
    grid: dict[str, tuple[float, ...]]

    def instances(self) -> list[str]:
        keys = list(self.grid)
        out = []
        for values in itertools.product(*(self.grid[k] for k in keys)):
            text = self.template
            for k, v in zip(keys, values):
                text = text.replace("{" + k + "}", _fmt(v))
            out.append(text)
        return out


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else str(v)


FAMILIES = {
    "phi1": Family("phi1", "G(velocity < {p})",
                   {"p": (50, 55, 60, 65, 70, 75, 80, 100, 120)}),
    "phi2": Family("phi2", "G(gear == 2 -> velocity > {p})",
                   {"p": (15, 17.5, 20, 22.5, 25)}),
    "phi4": Family("phi4", "G_[0,26](velocity < {p1}) || G_[28,28](velocity > {p2})",
                   {"p1": (50, 60, 70), "p2": (20, 30, 40)}),
    "phi6": Family("phi6", "G(velocity < {p1} -> G_[0,{p2}](velocity < {p3}))",
                   {"p1": (30, 40), "p2": (8, 10), "p3": (50, 60)}),
}


def family(name: str) -> list[str]:
    return FAMILIES[name].instances()


@dataclass
class SearchReport:
    formula: str
    samples: int
    best: float
    hits: int

    @property
    def falsifiable(self) -> bool:
        return self.hits > 0


def random_search(specs: list[str], samples: int = 100_000, seed: int = 0, length: int = 30,
                  symbols: dict | None = None, params: PlantParams = DEFAULT_PARAMS,
                  chunk: int = 20_000, eq_margin: float = 1.0) -> list[SearchReport]:
    """Uniform random words through the vectorized plant; robustness per spec.

    A spec counts as falsifiable when some sampled word has negative
    robustness upper bound (a definite violation within the word).
    """
    symbols = symbols or DEFAULT_SYMBOLS
    values = np.array([[s["throttle"], s["brake"]] for s in symbols.values()], dtype=float)
    formulas = [parse_formula(s, VARIABLES) for s in specs]
    best = np.full(len(specs), np.inf)
    hits = np.zeros(len(specs), dtype=int)
    rng = np.random.default_rng(seed)
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        idx = rng.integers(len(values), size=(n, length))
        inputs = values[idx]
        out = simulate_batch(inputs, params)
        columns = {
            "throttle": inputs[:, :, 0].T, "brake": inputs[:, :, 1].T,
            "velocity": out[:, :, 0].T, "rotation": out[:, :, 1].T, "gear": out[:, :, 2].T,
        }
        for i, f in enumerate(formulas):
            _, hi = fin_robust_batch(f, columns, eq_margin)
            best[i] = min(best[i], float(hi.min()))
            hits[i] += int((hi < 0).sum())
        done += n
    return [SearchReport(s, samples, float(b), int(h)) for s, b, h in zip(specs, best, hits)]
