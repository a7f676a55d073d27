"""Black-box checking of STL safety properties, guided by robustness."""
from .stl import (
    Formula, RobustInterval, Trace, Verdict, fin_robust, parse_formula, point_robust, verdict,
)
from .mealy import MealyMachine, distinguish

__all__ = [
    "Formula", "MealyMachine", "RobustInterval", "Trace", "Verdict",
    "distinguish", "fin_robust", "parse_formula", "point_robust", "verdict",
]
__version__ = "0.1.0"
