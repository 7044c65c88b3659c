"""Flooding reliability.

Model: the source broadcasts, every node that receives the packet rebroadcasts
once, and each directed link is independently up with its probability.  A node
is reached iff the up-links contain a directed path from the source, so its
flooding reliability is the two-terminal reliability of the DAG.

Two independent computations:

* :func:`fpp_bruteforce` — sums over all ``2^E`` edge states (each state's
  probability times a reachability check).  Exponential; guarded by an edge
  cap.  Serves as the ground-truth oracle.
* :func:`fpp_fast` — sweeps the DAG once while maintaining the joint
  probability distribution over *which subset of a small vertex cut* has
  received the packet.  The cut grows by one node per step (only nodes whose
  remaining in-edges all start inside the cut are eligible) and shrinks as
  members run out of outgoing edges, which marginalizes them out of the
  distribution.  Exponential only in the widest cut encountered, not in the
  edge count.

:func:`fpp_bounds` evaluates interval graphs at both endpoints: flooding
reliability is monotone in every link probability, so substituting all lower
(upper) bounds yields the exact envelope.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import CapError, GraphError
from .graph import (
    FPP,
    FPP_HI,
    FPP_LO,
    Dodag,
    IntervalGraph,
    MetricTable,
    reachable_from,
    topological_order,
)

#: Default cap on edge count for the exhaustive state enumeration.
BRUTEFORCE_EDGE_CAP = 20

#: Default cap on vertex-cut width for the sweep (pmf holds ``2^width`` floats).
SWEEP_CUT_CAP = 25


@dataclass(frozen=True)
class CutDistribution:
    """Joint pmf over which subset of the current cut holds the packet.

    ``pmf[s]`` is the probability that exactly the cut members whose bit is
    set in ``s`` have received the packet, where bit ``i`` stands for
    ``cut[i]``.  The entries always sum to 1.
    """

    cut: tuple[int, ...]
    pmf: np.ndarray

    @property
    def total(self) -> float:
        return float(self.pmf.sum())


@dataclass(frozen=True)
class SweepStep:
    """Instrumentation record emitted after each sweep step."""

    step: int
    picked: int
    added: int
    retired: tuple[int, ...]
    value: float
    distribution: CutDistribution


def fpp_bruteforce(
    g: Dodag, source: int, *, edge_cap: int = BRUTEFORCE_EDGE_CAP
) -> MetricTable:
    """Flooding reliability of every node by exhaustive edge-state enumeration."""
    if not 0 <= source < g.node_count:
        raise GraphError(f"source {source} out of range for {g.node_count} nodes")
    edge_count = len(g.edges)
    if edge_count > edge_cap:
        raise CapError(
            f"{edge_count} edges exceed brute-force cap {edge_cap}",
            cap=edge_cap,
            observed=edge_count,
        )
    position = {node: i for i, node in enumerate(topological_order(g))}
    states = np.arange(1 << edge_count, dtype=np.uint64)

    probability = np.ones(len(states), dtype=np.float64)
    for e, (u, v, p) in enumerate(g.edges):
        up = ((states >> np.uint64(e)) & np.uint64(1)).astype(bool)
        probability[up] *= p
        probability[~up] *= 1.0 - p

    reach: dict[int, np.ndarray] = {source: np.ones(len(states), dtype=bool)}
    for e in sorted(range(edge_count), key=lambda e: (position[g.edges[e][0]], e)):
        u, v, _ = g.edges[e]
        reached_u = reach.get(u)
        if reached_u is None:
            continue
        up = ((states >> np.uint64(e)) & np.uint64(1)).astype(bool)
        if v not in reach:
            reach[v] = np.zeros(len(states), dtype=bool)
        reach[v] |= reached_u & up

    values = {v: 0.0 for v in range(g.node_count)}
    values[source] = 1.0
    for v, reached in reach.items():
        if v != source:
            values[v] = min(1.0, float(probability[reached].sum()))
    return MetricTable(FPP, values)


def fpp_fast(
    g: Dodag,
    source: int,
    *,
    cut_cap: int = SWEEP_CUT_CAP,
    on_step: Callable[[SweepStep], None] | None = None,
) -> MetricTable:
    """Flooding reliability of every node via the vertex-cut sweep.

    Nodes unreachable from ``source`` score 0 and are skipped entirely.
    Raises :class:`CapError` if the cut would outgrow ``cut_cap``.
    """
    if not 0 <= source < g.node_count:
        raise GraphError(f"source {source} out of range for {g.node_count} nodes")
    topological_order(g)  # rejects cycles up front
    values = {v: 0.0 for v in range(g.node_count)}
    values[source] = 1.0
    alive = reachable_from(g, source)
    if len(alive) == 1:
        return MetricTable(FPP, values)

    # Live view of the subgraph induced by reachable nodes.
    preds: dict[int, list[tuple[int, float]]] = {v: [] for v in alive}
    out_live: dict[int, set[int]] = {v: set() for v in alive}
    unseen_preds: dict[int, int] = {v: 0 for v in alive}
    for u, v, p in g.edges:
        if u in alive:
            preds[v].append((u, p))
            out_live[u].add(v)
            unseen_preds[v] += 1
    # The source starts out processed: its out-neighbors have seen it.
    for w, _ in g.out_edges(source):
        unseen_preds[w] -= 1

    cut: list[int] = [source]
    pmf = np.array([0.0, 1.0])
    pending = set(alive) - {source}
    picked = source
    step = 0

    while pending:
        eligible = {j for j in pending if unseen_preds[j] == 0}
        if picked not in cut or not (out_live[picked] & eligible):
            candidates = [i for i in cut if out_live[i] & eligible]
            picked = min(candidates, key=lambda i: (len(out_live[i] & eligible), i))
        added = min(out_live[picked] & eligible)

        if len(cut) + 1 > cut_cap:
            raise CapError(
                f"vertex cut would reach {len(cut) + 1} nodes, cap {cut_cap}",
                cap=cut_cap,
                observed=len(cut) + 1,
            )
        position = {node: i for i, node in enumerate(cut)}
        index = np.arange(len(pmf))
        miss = np.ones(len(pmf), dtype=np.float64)
        for u, p in preds[added]:
            holds = ((index >> position[u]) & 1).astype(bool)
            miss[holds] *= 1.0 - p
        arrival = pmf * (1.0 - miss)
        values[added] = min(1.0, float(arrival.sum()))
        pmf = np.concatenate([pmf * miss, arrival])
        cut.append(added)

        for u, _ in preds[added]:
            out_live[u].discard(added)
        pending.discard(added)
        for w, _ in g.out_edges(added):
            unseen_preds[w] -= 1

        retired = [node for node in cut if not out_live[node]]
        if retired:
            position = {node: i for i, node in enumerate(cut)}
            for node in sorted(retired, key=lambda n: -position[n]):
                width = 1 << position[node]
                pmf = pmf.reshape(-1, 2, width).sum(axis=1).reshape(-1)
            gone = set(retired)
            cut = [node for node in cut if node not in gone]

        step += 1
        if on_step is not None:
            on_step(
                SweepStep(
                    step=step,
                    picked=picked,
                    added=added,
                    retired=tuple(sorted(retired)),
                    value=values[added],
                    distribution=CutDistribution(tuple(cut), pmf.copy()),
                )
            )
    return MetricTable(FPP, values)


def fpp_bounds(
    ig: IntervalGraph, source: int, *, cut_cap: int = SWEEP_CUT_CAP
) -> tuple[MetricTable, MetricTable]:
    """Exact flooding-reliability envelope of an interval graph.

    Monotonicity in each link probability makes the endpoint substitutions
    exact: the lower table evaluates every link at ``p_lo``, the upper at
    ``p_hi``.
    """
    lo = fpp_fast(ig.at_lo(), source, cut_cap=cut_cap)
    hi = fpp_fast(ig.at_hi(), source, cut_cap=cut_cap)
    return (
        MetricTable(FPP_LO, dict(lo.values)),
        MetricTable(FPP_HI, dict(hi.values)),
    )


def fpp_to_sink(g: Dodag, *, cut_cap: int = SWEEP_CUT_CAP) -> MetricTable:
    """Flooding reliability from every node *to the sink* in one sweep.

    A directed path from ``v`` to the sink exists iff the reversed graph has a
    path from the sink to ``v``, so one sweep of the edge-reversed graph
    rooted at the sink scores all nodes at once.
    """
    reversed_g = Dodag(
        g.node_count,
        tuple((v, u, p) for u, v, p in g.edges),
        sink=g.sink,
        source=g.sink,
    )
    table = fpp_fast(reversed_g, g.sink, cut_cap=cut_cap)
    return MetricTable(FPP, dict(table.values))
