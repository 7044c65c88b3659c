"""Graph containers and orderings for mesh routing topologies.

Three containers cover the toolkit's inputs and outputs:

* :class:`ConnectivityGraph` — undirected link-quality graph, the raw input
  to topology builders (who can talk to whom, and how well).
* :class:`Dodag` — a directed acyclic routing topology with a declared sink
  and optional source.  All metric computations run on this.
* :class:`IntervalGraph` — a ``Dodag`` whose link probabilities are only
  known up to an interval ``[p_lo, p_hi]``; used for bound computations.

All containers are immutable after construction and safe to share.
Construction rejects malformed input (ids out of range, self loops, parallel
edges, probabilities outside ``[0, 1]`` by more than ``1e-12``); graph-shape
checks that depend on the whole edge set (acyclicity, sink out-degree) live in
:func:`validate_dodag`, which reports violations instead of raising.
"""

from __future__ import annotations

import graphlib
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple

from .errors import CycleError, GraphError

#: Probabilities may stray outside [0, 1] by at most this much (then clamped).
PROB_SLACK = 1e-12

# Metric kind tags used by MetricTable producers.
FPP = "fpp"
URF = "urf"
RRURF = "rrurf"
FPP_LO = "fpp_lo"
FPP_HI = "fpp_hi"
URF_LO = "urf_lo"
URF_HI = "urf_hi"


def _clamp_probability(p: float, where: str) -> float:
    p = float(p)
    if p != p or p in (float("inf"), float("-inf")):
        raise GraphError(f"{where}: probability must be finite, got {p!r}")
    if p < 0.0:
        if p < -PROB_SLACK:
            raise GraphError(f"{where}: probability {p!r} below 0")
        return 0.0
    if p > 1.0:
        if p > 1.0 + PROB_SLACK:
            raise GraphError(f"{where}: probability {p!r} above 1")
        return 1.0
    return p


def _check_node(node: int, node_count: int, what: str) -> int:
    if not isinstance(node, int) or isinstance(node, bool):
        raise GraphError(f"{what} must be an integer node id, got {node!r}")
    if not 0 <= node < node_count:
        raise GraphError(f"{what} {node} out of range for {node_count} nodes")
    return node


class NeighborSets(NamedTuple):
    """Upstream / downstream view of one node in a :class:`Dodag`."""

    upstream: frozenset[int]
    downstream: frozenset[int]
    out_edges: tuple[tuple[int, float], ...]


@dataclass(frozen=True)
class Dodag:
    """Directed acyclic routing topology over nodes ``0..node_count-1``.

    ``edges`` holds ``(u, v, p)`` triples meaning "u can forward to v and the
    link delivers with probability p".  Edges are normalized to canonical
    order (sorted by ``(u, v)``) on construction.
    """

    node_count: int
    edges: tuple[tuple[int, int, float], ...]
    sink: int
    source: int | None = None

    def __post_init__(self) -> None:
        if self.node_count < 1:
            raise GraphError(f"node_count must be >= 1, got {self.node_count}")
        seen: set[tuple[int, int]] = set()
        canonical = []
        for edge in self.edges:
            u, v, p = edge
            _check_node(u, self.node_count, "edge tail")
            _check_node(v, self.node_count, "edge head")
            if u == v:
                raise GraphError(f"self loop on node {u}")
            if (u, v) in seen:
                raise GraphError(f"parallel edge ({u}, {v})")
            seen.add((u, v))
            canonical.append((u, v, _clamp_probability(p, f"edge ({u}, {v})")))
        canonical.sort(key=lambda e: (e[0], e[1]))
        object.__setattr__(self, "edges", tuple(canonical))
        _check_node(self.sink, self.node_count, "sink")
        if self.source is not None:
            _check_node(self.source, self.node_count, "source")

    @cached_property
    def _out(self) -> dict[int, tuple[tuple[int, float], ...]]:
        table: dict[int, list[tuple[int, float]]] = {v: [] for v in range(self.node_count)}
        for u, v, p in self.edges:
            table[u].append((v, p))
        return {u: tuple(vs) for u, vs in table.items()}

    @cached_property
    def _in(self) -> dict[int, tuple[tuple[int, float], ...]]:
        table: dict[int, list[tuple[int, float]]] = {v: [] for v in range(self.node_count)}
        for u, v, p in self.edges:
            table[v].append((u, p))
        return {v: tuple(us) for v, us in table.items()}

    def out_edges(self, u: int) -> tuple[tuple[int, float], ...]:
        """``(v, p)`` pairs for every link out of ``u``, sorted by ``v``."""
        _check_node(u, self.node_count, "node")
        return self._out[u]

    def in_edges(self, v: int) -> tuple[tuple[int, float], ...]:
        """``(u, p)`` pairs for every link into ``v``, sorted by ``u``."""
        _check_node(v, self.node_count, "node")
        return self._in[v]

    def downstream(self, u: int) -> frozenset[int]:
        return frozenset(v for v, _ in self.out_edges(u))

    def upstream(self, v: int) -> frozenset[int]:
        return frozenset(u for u, _ in self.in_edges(v))

    def neighbor_sets(self, v: int) -> NeighborSets:
        return NeighborSets(self.upstream(v), self.downstream(v), self.out_edges(v))

    def outdegree(self, u: int) -> int:
        return len(self.out_edges(u))

    def indegree(self, v: int) -> int:
        return len(self.in_edges(v))


@dataclass(frozen=True)
class ConnectivityGraph:
    """Undirected link-quality graph; input to the topology builders.

    ``edges`` holds ``(u, v, p)`` with ``u < v`` after normalization.
    ``positions`` optionally carries one ``(x, y)`` pair per node.
    """

    node_count: int
    edges: tuple[tuple[int, int, float], ...]
    positions: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self) -> None:
        if self.node_count < 1:
            raise GraphError(f"node_count must be >= 1, got {self.node_count}")
        seen: set[tuple[int, int]] = set()
        canonical = []
        for u, v, p in self.edges:
            _check_node(u, self.node_count, "edge endpoint")
            _check_node(v, self.node_count, "edge endpoint")
            if u == v:
                raise GraphError(f"self loop on node {u}")
            lo, hi = (u, v) if u < v else (v, u)
            if (lo, hi) in seen:
                raise GraphError(f"duplicate undirected edge ({lo}, {hi})")
            seen.add((lo, hi))
            canonical.append((lo, hi, _clamp_probability(p, f"edge ({lo}, {hi})")))
        canonical.sort(key=lambda e: (e[0], e[1]))
        object.__setattr__(self, "edges", tuple(canonical))
        if self.positions is not None:
            if len(self.positions) != self.node_count:
                raise GraphError(
                    f"{len(self.positions)} positions for {self.node_count} nodes"
                )
            object.__setattr__(
                self,
                "positions",
                tuple((float(x), float(y)) for x, y in self.positions),
            )

    @cached_property
    def _adj(self) -> dict[int, tuple[tuple[int, float], ...]]:
        table: dict[int, list[tuple[int, float]]] = {v: [] for v in range(self.node_count)}
        for u, v, p in self.edges:
            table[u].append((v, p))
            table[v].append((u, p))
        return {u: tuple(sorted(vs)) for u, vs in table.items()}

    def neighbors(self, u: int) -> tuple[tuple[int, float], ...]:
        """``(v, p)`` pairs for every undirected link of ``u``, sorted by ``v``."""
        _check_node(u, self.node_count, "node")
        return self._adj[u]

    def degree(self, u: int) -> int:
        return len(self.neighbors(u))

    def component(self, start: int) -> frozenset[int]:
        """All nodes reachable from ``start`` along undirected edges."""
        _check_node(start, self.node_count, "node")
        seen = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v, _ in self.neighbors(u):
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        return frozenset(seen)

    def is_connected(self) -> bool:
        return len(self.component(0)) == self.node_count


@dataclass(frozen=True)
class IntervalGraph:
    """A routing DAG whose link probabilities are intervals ``[p_lo, p_hi]``."""

    node_count: int
    edges: tuple[tuple[int, int, float, float], ...]
    sink: int
    source: int | None = None

    def __post_init__(self) -> None:
        if self.node_count < 1:
            raise GraphError(f"node_count must be >= 1, got {self.node_count}")
        seen: set[tuple[int, int]] = set()
        canonical = []
        for u, v, lo, hi in self.edges:
            _check_node(u, self.node_count, "edge tail")
            _check_node(v, self.node_count, "edge head")
            if u == v:
                raise GraphError(f"self loop on node {u}")
            if (u, v) in seen:
                raise GraphError(f"parallel edge ({u}, {v})")
            seen.add((u, v))
            lo = _clamp_probability(lo, f"edge ({u}, {v}) lower bound")
            hi = _clamp_probability(hi, f"edge ({u}, {v}) upper bound")
            if lo > hi:
                raise GraphError(f"edge ({u}, {v}): p_lo {lo!r} exceeds p_hi {hi!r}")
            canonical.append((u, v, lo, hi))
        canonical.sort(key=lambda e: (e[0], e[1]))
        object.__setattr__(self, "edges", tuple(canonical))
        _check_node(self.sink, self.node_count, "sink")
        if self.source is not None:
            _check_node(self.source, self.node_count, "source")

    def at_lo(self) -> Dodag:
        """The point graph with every probability at its lower bound."""
        return Dodag(
            self.node_count,
            tuple((u, v, lo) for u, v, lo, _ in self.edges),
            self.sink,
            self.source,
        )

    def at_hi(self) -> Dodag:
        """The point graph with every probability at its upper bound."""
        return Dodag(
            self.node_count,
            tuple((u, v, hi) for u, v, _, hi in self.edges),
            self.sink,
            self.source,
        )


@dataclass(frozen=True)
class MetricTable:
    """Per-node metric values with a kind tag (and optional hop counts)."""

    kind: str
    values: Mapping[int, float]
    hops: Mapping[int, int] | None = None

    def __getitem__(self, node: int) -> float:
        return self.values[node]

    def __iter__(self):
        return iter(sorted(self.values))


@dataclass(frozen=True)
class Violation:
    """One structural problem found by :func:`validate_dodag`."""

    kind: str
    nodes: tuple[int, ...]
    message: str


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...] = ()


def topological_order(g: Dodag) -> tuple[int, ...]:
    """Nodes ordered so every edge points from earlier to later.

    Deterministic for a given graph.  Raises :class:`CycleError` carrying a
    cycle witness if the edge set is not acyclic.
    """
    sorter: graphlib.TopologicalSorter[int] = graphlib.TopologicalSorter()
    for v in range(g.node_count):
        sorter.add(v)
    for u, v, _ in g.edges:
        sorter.add(v, u)
    try:
        return tuple(sorter.static_order())
    except graphlib.CycleError as exc:
        raise CycleError(exc.args[1]) from None


def validate_dodag(g: Dodag, *, require_outgoing: bool = False) -> ValidationReport:
    """Check graph-shape invariants, reporting violations instead of raising.

    Always checks acyclicity and that the sink has no outgoing edges.  With
    ``require_outgoing=True`` additionally reports every non-sink node that
    has no outgoing edge (a packet arriving there can never progress).
    """
    violations: list[Violation] = []
    try:
        topological_order(g)
    except CycleError as exc:
        violations.append(
            Violation(
                "cycle", exc.cycle, f"cycle: {' -> '.join(map(str, exc.cycle))}"
            )
        )
    for v, _ in g.out_edges(g.sink):
        violations.append(
            Violation(
                "sink-out-edge",
                (g.sink, v),
                f"sink {g.sink} has outgoing edge to {v}",
            )
        )
    if require_outgoing:
        for u in range(g.node_count):
            if u != g.sink and g.outdegree(u) == 0:
                violations.append(
                    Violation(
                        "no-out-edge", (u,), f"non-sink node {u} has no outgoing edge"
                    )
                )
    return ValidationReport(not violations, tuple(violations))


def reachable_from(g: Dodag, source: int) -> frozenset[int]:
    """Nodes reachable from ``source`` along directed edges (incl. itself)."""
    _check_node(source, g.node_count, "source")
    seen = {source}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v, _ in g.out_edges(u):
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return frozenset(seen)


def hops_to_sink(g: Dodag) -> dict[int, int]:
    """Longest directed path length (in hops) from each node to the sink.

    Nodes with no directed path to the sink are omitted.
    """
    order = topological_order(g)
    hops: dict[int, int] = {g.sink: 0}
    for u in reversed(order):
        if u == g.sink:
            continue
        best = -1
        for v, _ in g.out_edges(u):
            if v in hops and hops[v] >= best:
                best = hops[v]
        if best >= 0:
            hops[u] = best + 1
    return hops
