"""Length scaling for the rational/negative regime.

Rounds every edge length up to the next multiple of Delta =
theta * Bdgt_min / Hop-bound.  Feasible walks with fewer than Hop-bound edges
stay theta-feasible after scaling, and theta-feasible scaled walks are
theta-feasible in the base instance (the scaled length dominates the true
one).  The integer regime bypasses this module entirely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .config import DEFAULT_CONFIG, SolverConfig
from .errors import ContractError
from .model import (
    Edge,
    PcsInstance,
    ResourceVector,
    Walk,
    condition_numbers,
    walk_resource,
)
from .rcsp import hop_bound


@dataclass(frozen=True)
class ScaledInstance:
    base: PcsInstance
    theta: Fraction
    delta: Fraction
    units: tuple  # d_e per edge; scaled length = d_e * delta
    hop_bound_value: int

    def scaled_res(self, eid: int) -> ResourceVector:
        base = self.base.edges[eid].res
        return ResourceVector((self.units[eid] * self.delta,) + base.entries[1:])

    def as_instance(self) -> PcsInstance:
        """The scaled graph as a plain instance (costs and demands inherited)."""
        edges = tuple(
            Edge(e.tail, e.head, e.cost, self.scaled_res(eid))
            for eid, e in enumerate(self.base.edges)
        )
        return PcsInstance(
            n=self.base.n,
            edges=edges,
            demands=self.base.demands,
            tau=self.base.tau,
            packing=self.base.packing,
            covering=self.base.covering,
        )


def _delta_for(instance: PcsInstance, theta: Fraction, hop: int) -> Fraction:
    numbers = condition_numbers(instance)
    return theta * numbers.bdgt_min / hop


def compute_delta(
    instance: PcsInstance, theta, config: SolverConfig = DEFAULT_CONFIG
) -> Fraction:
    theta = Fraction(theta)
    if theta <= 0:
        raise ContractError("theta must be positive")
    return _delta_for(instance, theta, hop_bound(instance, config))


def round_lengths_to_delta(lengths, delta: Fraction) -> tuple:
    """Integer multiples d with (d - 1) * delta < length <= d * delta."""
    return tuple(math.ceil(Fraction(length) / delta) for length in lengths)


def scale_instance(
    instance: PcsInstance, theta, config: SolverConfig = DEFAULT_CONFIG
) -> ScaledInstance:
    theta = Fraction(theta)
    if theta <= 0:
        raise ContractError("theta must be positive")
    hop = hop_bound(instance, config)
    delta = _delta_for(instance, theta, hop)
    units = round_lengths_to_delta((e.res[0] for e in instance.edges), delta)
    return ScaledInstance(
        base=instance,
        theta=theta,
        delta=delta,
        units=units,
        hop_bound_value=hop,
    )


def scaled_walk_resource(walk: Walk, scaled: ScaledInstance) -> ResourceVector:
    total_units = sum(scaled.units[eid] for eid in walk.edges)
    rest = walk_resource(walk, scaled.base).entries[1:]
    return ResourceVector((total_units * scaled.delta,) + tuple(rest))


def check_scaling_claims(
    instance: PcsInstance, scaled: ScaledInstance, walks
) -> list:
    """Exact per-walk checks: RES <= ScaledRes componentwise, and the total
    rounding slack stays below theta * Bdgt_min.  Returns violations."""
    numbers = condition_numbers(instance)
    violations = []
    for walk in walks:
        if len(walk) >= scaled.hop_bound_value:
            raise ContractError("scaling claims only cover walks shorter than the hop bound")
        res = walk_resource(walk, instance)
        sres = scaled_walk_resource(walk, scaled)
        if not res.dominated_by(sres):
            violations.append((walk, "scaled consumption fails to dominate"))
        if sres[0] > res[0] + scaled.theta * numbers.bdgt_min:
            violations.append((walk, "rounding slack exceeds theta * Bdgt_min"))
    return violations
