"""Solver configuration knobs with desk-scale defaults."""

import math
from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class SolverConfig:
    # height reduction: h = ceil(1/epsilon)
    epsilon: Fraction = Fraction(1, 2)
    # length-relaxation tolerance for the rational regime
    theta: Fraction = Fraction(1, 10)
    # master seed; per-iteration/per-run streams are derived from it
    seed: int = 0
    # product graphs larger than this many vertices are rejected up front
    max_product_vertices: int = 10**7
    # randomized rounding retries before partial acceptance / fallback
    rounding_retries: int = 64
    # hop cap = hop_cap_factor * n^2 states per resource configuration
    hop_cap_factor: int = 2
    # brute-force enumeration caps
    enum_cap: int = 12
    catalog_limit: int = 10**5
    combination_limit: int = 10**6
    # layered-path enumeration guard (per attachment state)
    max_paths_per_terminal: int = 20000
    # LPs at most this many columns are solved with the exact rational simplex
    exact_lp_threshold: int = 48
    workers: int = 1

    @property
    def height(self) -> int:
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        return max(1, math.ceil(1 / Fraction(self.epsilon)))


DEFAULT_CONFIG = SolverConfig()
