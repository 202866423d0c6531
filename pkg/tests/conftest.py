from fractions import Fraction

import pytest

from pcspan.model import Demand, Edge, PcsInstance, ResourceVector
from pcspan.reductions import (
    AVOID,
    MUST_VISIT,
    RcsDemand,
    RcsEdge,
    RcsGroup,
    RcsInstance,
)


def fr(x) -> Fraction:
    return Fraction(x)


def make_instance(n, edges, demands, tau, packing, covering) -> PcsInstance:
    """edges: (u, v, cost, res tuple); demands: (s, t, budget tuple)."""
    return PcsInstance(
        n=n,
        edges=tuple(
            Edge(u, v, Fraction(c), ResourceVector((Fraction(r[0]),) + tuple(r[1:])))
            for (u, v, c, r) in edges
        ),
        demands=tuple(
            Demand(s, t, ResourceVector((Fraction(b[0]),) + tuple(b[1:])))
            for (s, t, b) in demands
        ),
        tau=tau,
        packing=packing,
        covering=covering,
    )


@pytest.fixture
def tri_instance() -> PcsInstance:
    """s=0 -> a=1 -> t=2 with a too-long direct edge; OPT = {0, 1}, cost 2."""
    return make_instance(
        n=3,
        edges=[
            (0, 1, 1, (1, 1)),
            (1, 2, 1, (1, 0)),
            (0, 2, 1, (3, 0)),
        ],
        demands=[(0, 2, (2, 1))],
        tau=1,
        packing=1,
        covering=0,
    )


DOUBLE_LOOP_ARCS = [
    (0, 1),  # a -> b
    (1, 2),  # b -> c
    (2, 3),  # c -> d
    (3, 4),  # d -> e
    (2, 5),  # c -> f
    (5, 6),  # f -> g
    (6, 2),  # g -> c
    (2, 7),  # c -> h
    (7, 8),  # h -> i
    (8, 2),  # i -> c
]
DOUBLE_LOOP_NAMES = "abcdefghi"


@pytest.fixture
def double_loop_rcs() -> RcsInstance:
    """Unit-length ring graph where the (a, e) demand must visit h and g."""
    return RcsInstance(
        n=9,
        edges=tuple(RcsEdge(u, v, Fraction(1), 1) for (u, v) in DOUBLE_LOOP_ARCS),
        groups=(
            RcsGroup(MUST_VISIT, frozenset({7})),  # {h}
            RcsGroup(MUST_VISIT, frozenset({6})),  # {g}
        ),
        demands=(RcsDemand(0, 4, (10, 1, 1)),),
    )


@pytest.fixture
def double_loop_pcs(double_loop_rcs) -> PcsInstance:
    from pcspan.reductions import rcs_to_pcs

    instance, _ = rcs_to_pcs(double_loop_rcs)
    return instance
