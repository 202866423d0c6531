"""Rooted layered product graph: resource budgets become connectivity.

States are (vertex, label, side).  A label is an integer vector; entry 0
counts length in units of delta (delta = 1 in the integer regime, Delta in
the scaled regime), entries 1..m are the clamped resource coordinates.  On
the R side a walk from (r, 0, R) to (u, I, R) witnesses an r ~> u walk of
clamped consumption I * delta; on the L side a walk from (u, I, L) to
(r, 0, L) witnesses a u ~> r walk likewise.  A single zero-cost dummy edge
bridges (r, 0, L) -> (r, 0, R).

Unlike the bare two-copy picture, every vertex (the root included) carries
all valid labels, so junction walks that revisit the root mid-way are tracked
exactly; only the zero-label root copies are bridged.  Covering coordinates
clamp at -tau per coordinate during edge transitions, mirroring the RCSP
oracle, so both sides compute the same reachability relation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .config import DEFAULT_CONFIG, SolverConfig
from .errors import ContractError, ResourceLimitError
from .model import PcsInstance, Walk, theta_relaxed_bound
from .scaling import ScaledInstance


@dataclass(frozen=True)
class LayerBounds:
    lower: tuple  # t^- as integer units
    upper: tuple  # t^+ as integer units
    delta: Fraction

    def valid(self, label: tuple) -> bool:
        return all(self.lower[i] <= label[i] <= self.upper[i] for i in range(len(label)))

    def config_count(self) -> int:
        out = 1
        for lo, hi in zip(self.lower[1:], self.upper[1:]):
            out *= hi - lo + 1
        return out

    def label_count(self) -> int:
        out = 1
        for lo, hi in zip(self.lower, self.upper):
            out *= hi - lo + 1
        return out


def layer_bounds(problem) -> LayerBounds:
    """The t^-/t^+ label bounds for an instance or scaled instance."""
    if isinstance(problem, ScaledInstance):
        instance = problem.base
        delta = problem.delta
        hop = problem.hop_bound_value
        min_units = min(problem.units) if problem.units else 0
        t0_minus = min(hop * min_units, 0)
        bmax = max(abs(d.budget[0]) for d in instance.demands)
        t0_plus = math.ceil(bmax * (1 + problem.theta) / delta) + abs(t0_minus)
    else:
        instance = problem
        if not instance.is_integer_regime():
            raise ContractError(
                "integer-regime product graph needs positive integer lengths; scale first"
            )
        delta = Fraction(1)
        t0_minus = 0
        t0_plus = math.floor(max(d.budget[0] for d in instance.demands))
    lower = [t0_minus]
    upper = [t0_plus]
    for i in range(1, instance.dim):
        if instance.resource_kind(i) == "packing":
            lower.append(0)
            upper.append(instance.tau)
        else:
            lower.append(-instance.tau)
            upper.append(0)
    return LayerBounds(tuple(lower), tuple(upper), delta)


def _base_of(problem) -> PcsInstance:
    return problem.base if isinstance(problem, ScaledInstance) else problem


def _edge_units(problem, eid: int) -> int:
    if isinstance(problem, ScaledInstance):
        return problem.units[eid]
    return int(_base_of(problem).edges[eid].res[0])


def step_label(instance: PcsInstance, bounds: LayerBounds, label: tuple, eid: int, units: int):
    """Label after traversing the edge (R-side orientation); None if invalid."""
    res = instance.edges[eid].res
    out = [label[0] + units]
    for i in range(1, instance.dim):
        v = label[i] + res[i]
        if instance.resource_kind(i) == "covering" and v < -instance.tau:
            v = -instance.tau
        out.append(v)
    out = tuple(out)
    return out if bounds.valid(out) else None


def compose_labels(instance: PcsInstance, i_label: tuple, j_label: tuple) -> tuple:
    """Clamped label of a concatenated walk from the two halves' labels."""
    out = [i_label[0] + j_label[0]]
    for i in range(1, instance.dim):
        v = i_label[i] + j_label[i]
        if instance.resource_kind(i) == "covering" and v < -instance.tau:
            v = -instance.tau
        out.append(v)
    return tuple(out)


def demand_budget_units(problem, demand_idx: int, bounds: LayerBounds) -> tuple:
    """Per-demand relation bound as an integer label box.

    Entry 0 is floor(bound / delta) with the theta relaxation applied in the
    scaled regime; entries 1..m are the exact integer budgets.
    """
    instance = _base_of(problem)
    d = instance.demands[demand_idx]
    if isinstance(problem, ScaledInstance):
        bound0 = theta_relaxed_bound(d.budget[0], problem.theta)
    else:
        bound0 = d.budget[0]
    units0 = math.floor(Fraction(bound0) / bounds.delta)
    return (units0,) + tuple(d.budget[i] for i in range(1, instance.dim))


def relation_holds(budget_units: tuple, i_label: tuple, j_label: tuple) -> bool:
    """(I + J) within the demand's box (clamping never changes the answer
    because budgets are >= -tau)."""
    return all(a + b <= c for a, b, c in zip(i_label, j_label, budget_units))


@dataclass(frozen=True)
class ProductEdge:
    tail: int
    head: int
    cost: Fraction
    base_edge: int | None  # None for the dummy bridge / terminal attachments
    kind: str  # "state", "bridge", "attach"


@dataclass
class ProductGraph:
    problem: object  # PcsInstance or ScaledInstance
    root: int
    bounds: LayerBounds
    labels: tuple  # all valid labels, sorted
    vertex_ids: dict  # vertex key -> int id
    vertex_keys: tuple  # int id -> key
    edges: tuple  # ProductEdge
    out_adj: tuple
    in_adj: tuple

    # vertex keys:
    #   ("S", side, v, label)            product state
    #   ("T", demand_idx, end, label)    dummy terminal, end in {"src", "snk"}

    @property
    def instance(self) -> PcsInstance:
        return _base_of(self.problem)

    def state_id(self, side: str, v: int, label: tuple):
        return self.vertex_ids.get(("S", side, v, label))

    def terminal_id(self, demand_idx: int, end: str, label: tuple):
        return self.vertex_ids.get(("T", demand_idx, end, label))

    def root_left(self) -> int:
        zero = tuple(0 for _ in range(self.instance.dim))
        return self.vertex_ids[("S", "L", self.root, zero)]

    def root_right(self) -> int:
        zero = tuple(0 for _ in range(self.instance.dim))
        return self.vertex_ids[("S", "R", self.root, zero)]

    def budget_units(self, demand_idx: int) -> tuple:
        return demand_budget_units(self.problem, demand_idx, self.bounds)

    def relation_pairs(self, demand_idx: int):
        """All (I, J) label pairs in the demand's relation (valid labels)."""
        box = self.budget_units(demand_idx)
        for i_label in self.labels:
            for j_label in self.labels:
                if relation_holds(box, i_label, j_label):
                    yield i_label, j_label

    def relation_size(self, demand_idx: int) -> int:
        return sum(1 for _ in self.relation_pairs(demand_idx))


def _enumerate_labels(bounds: LayerBounds):
    ranges = [range(lo, hi + 1) for lo, hi in zip(bounds.lower, bounds.upper)]
    labels = [()]
    for rng in ranges:
        labels = [lab + (v,) for lab in labels for v in rng]
    return sorted(labels)


def build_product_graph(
    problem, root: int, config: SolverConfig = DEFAULT_CONFIG
) -> ProductGraph:
    instance = _base_of(problem)
    if not (0 <= root < instance.n):
        raise ContractError(f"root {root} outside vertex range")
    bounds = layer_bounds(problem)
    label_count = bounds.label_count()
    total_vertices = 2 * instance.n * label_count + 2 * len(instance.demands) * label_count
    if total_vertices > config.max_product_vertices:
        raise ResourceLimitError(
            f"product graph would need {total_vertices} vertices "
            f"(cap {config.max_product_vertices})"
        )
    labels = _enumerate_labels(bounds)

    vertex_ids = {}
    vertex_keys = []

    def add_vertex(key):
        vid = vertex_ids.get(key)
        if vid is None:
            vid = len(vertex_keys)
            vertex_ids[key] = vid
            vertex_keys.append(key)
        return vid

    for side in ("L", "R"):
        for v in range(instance.n):
            for lab in labels:
                add_vertex(("S", side, v, lab))
    for di in range(len(instance.demands)):
        for lab in labels:
            add_vertex(("T", di, "src", lab))
            add_vertex(("T", di, "snk", lab))

    # state edges; parallel duplicates keep the cheapest (then smallest id)
    best = {}
    for eid, e in enumerate(instance.edges):
        units = _edge_units(problem, eid)
        for lab in labels:
            nxt = step_label(instance, bounds, lab, eid, units)
            if nxt is None:
                continue
            # R side: (tail, lab) -> (head, nxt); L side: (tail, nxt) -> (head, lab)
            pairs = (
                (("S", "R", e.tail, lab), ("S", "R", e.head, nxt)),
                (("S", "L", e.tail, nxt), ("S", "L", e.head, lab)),
            )
            for tail_key, head_key in pairs:
                tv, hv = vertex_ids[tail_key], vertex_ids[head_key]
                cur = best.get((tv, hv))
                if cur is None or (e.cost, eid) < cur:
                    best[(tv, hv)] = (e.cost, eid)
    edges = [
        ProductEdge(tv, hv, cost, eid, "state")
        for (tv, hv), (cost, eid) in sorted(best.items())
    ]

    zero = tuple(0 for _ in range(instance.dim))
    edges.append(
        ProductEdge(
            vertex_ids[("S", "L", root, zero)],
            vertex_ids[("S", "R", root, zero)],
            Fraction(0),
            None,
            "bridge",
        )
    )
    for di, d in enumerate(instance.demands):
        for lab in labels:
            edges.append(
                ProductEdge(
                    vertex_ids[("T", di, "src", lab)],
                    vertex_ids[("S", "L", d.source, lab)],
                    Fraction(0),
                    None,
                    "attach",
                )
            )
            edges.append(
                ProductEdge(
                    vertex_ids[("S", "R", d.target, lab)],
                    vertex_ids[("T", di, "snk", lab)],
                    Fraction(0),
                    None,
                    "attach",
                )
            )
    out_adj = [[] for _ in vertex_keys]
    in_adj = [[] for _ in vertex_keys]
    for idx, pe in enumerate(edges):
        out_adj[pe.tail].append(idx)
        in_adj[pe.head].append(idx)
    return ProductGraph(
        problem=problem,
        root=root,
        bounds=bounds,
        labels=tuple(labels),
        vertex_ids=vertex_ids,
        vertex_keys=tuple(vertex_keys),
        edges=tuple(edges),
        out_adj=tuple(tuple(a) for a in out_adj),
        in_adj=tuple(tuple(a) for a in in_adj),
    )


def project_to_base(pg: ProductGraph, product_edge_ids) -> Walk:
    """Map product edges to their originating base edges; dummies vanish."""
    base = []
    for idx in product_edge_ids:
        if not (0 <= idx < len(pg.edges)):
            raise ContractError(f"product edge index {idx} out of range")
        ref = pg.edges[idx].base_edge
        if ref is not None:
            base.append(ref)
    return Walk(tuple(base))


def states_reaching_root_left(pg: ProductGraph) -> set:
    """Vertex ids (L states) that can reach (r, 0, L)."""
    target = pg.root_left()
    seen = {target}
    stack = [target]
    while stack:
        v = stack.pop()
        for idx in pg.in_adj[v]:
            pe = pg.edges[idx]
            if pe.kind != "state":
                continue
            if pe.tail not in seen:
                seen.add(pe.tail)
                stack.append(pe.tail)
    return seen


def states_reachable_from_root_right(pg: ProductGraph) -> set:
    """Vertex ids (R states) reachable from (r, 0, R)."""
    start = pg.root_right()
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for idx in pg.out_adj[v]:
            pe = pg.edges[idx]
            if pe.kind != "state":
                continue
            if pe.head not in seen:
                seen.add(pe.head)
                stack.append(pe.head)
    return seen


def connectable_relation_pairs(pg: ProductGraph, reach_left=None, reach_right=None) -> dict:
    """Per demand, the relation pairs whose endpoints actually connect to the
    root through the product graph (the rest carry no LP value)."""
    if reach_left is None:
        reach_left = states_reaching_root_left(pg)
    if reach_right is None:
        reach_right = states_reachable_from_root_right(pg)
    instance = pg.instance
    out = {}
    for di, d in enumerate(instance.demands):
        box = pg.budget_units(di)
        src_ok = [
            lab
            for lab in pg.labels
            if pg.vertex_ids[("S", "L", d.source, lab)] in reach_left
        ]
        snk_ok = [
            lab
            for lab in pg.labels
            if pg.vertex_ids[("S", "R", d.target, lab)] in reach_right
        ]
        pairs = [
            (i_lab, j_lab)
            for i_lab in src_ok
            for j_lab in snk_ok
            if relation_holds(box, i_lab, j_lab)
        ]
        out[di] = pairs
    return out


def equivalence_check(
    problem, root: int, config: SolverConfig = DEFAULT_CONFIG
) -> dict:
    """Compare product-graph terminal connectivity against the oracle's
    through-root feasibility on the two-copy intersection graph.

    In the scaled regime the oracle runs on the scaled graph with the same
    theta relaxation the relation uses.
    """
    from .rcsp import through_root_witness

    pg = build_product_graph(problem, root, config)
    pairs = connectable_relation_pairs(pg)
    instance = _base_of(problem)
    if isinstance(problem, ScaledInstance):
        oracle_instance = problem.as_instance()
        theta = problem.theta
    else:
        oracle_instance = problem
        theta = None
    report = {"root": root, "demands": [], "mismatches": 0}
    for di, d in enumerate(instance.demands):
        product_ok = bool(pairs[di])
        witness = through_root_witness(
            oracle_instance, oracle_instance.demands[di], root, theta=theta, config=config
        )
        oracle_ok = witness is not None
        report["demands"].append(
            {"demand": di, "product": product_ok, "oracle": oracle_ok}
        )
        if product_ok != oracle_ok:
            report["mismatches"] += 1
    return report


def dump_edges(pg: ProductGraph) -> str:
    """Debug dump: one state edge per line (side, u, I, v, J, cost)."""
    lines = []
    for pe in pg.edges:
        if pe.kind != "state":
            continue
        _, side, u, i_lab = pg.vertex_keys[pe.tail]
        _, _side, v, j_lab = pg.vertex_keys[pe.head]
        lines.append(f"{side} {u} {list(i_lab)} {v} {list(j_lab)} {pe.cost}")
    return "\n".join(sorted(lines)) + "\n"


def analytic_state_edge_count(problem) -> int:
    """Reference count: per base edge and side, the number of valid label
    pairs related by the clamped transition (duplicates not collapsed)."""
    instance = _base_of(problem)
    bounds = layer_bounds(problem)
    labels = _enumerate_labels(bounds)
    count = 0
    for eid in range(len(instance.edges)):
        units = _edge_units(problem, eid)
        per_edge = sum(
            1 for lab in labels if step_label(instance, bounds, lab, eid, units) is not None
        )
        count += 2 * per_edge  # L and R side
    return count
