"""Monte-Carlo forwarding oracle.

Independent check on the analytic metrics: replay the forwarding process
trial by trial with explicit random link states and count how often each node
sees the packet.  Three models:

* ``flood`` — every node that receives rebroadcasts once; a node is hit iff
  the up-links contain a directed path from the source.
* ``urf`` — unicast walk; at each node a uniformly random permutation of its
  outgoing links is drawn and the packet traverses the first up link in that
  permutation, or is dropped if all are down.
* ``rr`` — unicast walk with a fixed try order per node: links sorted by
  decreasing sink-rooted reliability of the neighbor (the fixed-order retry
  metric's own ordering).

Trials use counter-based per-trial substreams (see ``meshrel._kernels``), so
results are seed-deterministic and independent of batch splitting; the same
``(graph, config)`` always yields the same table on every backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ._kernels import get_backend
from .errors import GraphError
from .graph import Dodag, topological_order
from .urf import rrurf_sink, rrurf_try_orders

MODELS = ("flood", "urf", "rr")

_SEED_LIMIT = 1 << 64


@dataclass(frozen=True)
class TrialConfig:
    """What to simulate: model, trial count, seed, and endpoints.

    ``source``/``sink`` default to the graph's own declared endpoints.
    """

    model: str
    trials: int
    seed: int
    source: int | None = None
    sink: int | None = None

    def __post_init__(self) -> None:
        if self.model not in MODELS:
            raise GraphError(f"unknown model {self.model!r}; choose from {MODELS}")
        if self.trials < 1:
            raise GraphError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.seed < _SEED_LIMIT:
            raise GraphError("seed must fit in an unsigned 64-bit integer")


@dataclass(frozen=True)
class EstimateTable:
    """Hit counts per node plus the derived estimates."""

    model: str
    seed: int
    trials: int
    hits: Mapping[int, int]

    def estimate(self, node: int) -> float:
        return self.hits[node] / self.trials

    def stderr(self, node: int) -> float:
        p = self.estimate(node)
        return math.sqrt(max(p * (1.0 - p), 0.0) / self.trials)


def simulate(g: Dodag, cfg: TrialConfig, *, backend: str = "auto") -> EstimateTable:
    """Run ``cfg.trials`` forwarding trials on ``g`` and count per-node hits."""
    source = cfg.source if cfg.source is not None else g.source
    if source is None:
        raise GraphError("no source: set TrialConfig.source or Dodag.source")
    if not 0 <= source < g.node_count:
        raise GraphError(f"source {source} out of range for {g.node_count} nodes")
    order = topological_order(g)  # rejects cycles up front
    kernel = get_backend(backend)

    edge_p = np.array([p for _, _, p in g.edges], dtype=np.float64)
    if cfg.model == "flood":
        position = {node: i for i, node in enumerate(order)}
        edge_src = np.array([u for u, _, _ in g.edges], dtype=np.int64)
        edge_dst = np.array([v for _, v, _ in g.edges], dtype=np.int64)
        pass_order = np.array(
            sorted(range(len(g.edges)), key=lambda e: (position[g.edges[e][0]], e)),
            dtype=np.int64,
        )
        hits = kernel.flood_counts(
            g.node_count, edge_src, edge_dst, edge_p, pass_order,
            source, cfg.trials, cfg.seed,
        )
    else:
        edge_index = {(u, v): e for e, (u, v, _) in enumerate(g.edges)}
        if cfg.model == "rr":
            sink = cfg.sink if cfg.sink is not None else g.sink
            slot_layout = rrurf_try_orders(g, rrurf_sink(g, sink))
        else:
            slot_layout = {u: g.out_edges(u) for u in range(g.node_count)}
        offsets = np.zeros(g.node_count + 1, dtype=np.int64)
        targets = np.zeros(len(g.edges), dtype=np.int64)
        slot_edge = np.zeros(len(g.edges), dtype=np.int64)
        slot = 0
        for u in range(g.node_count):
            for v, _ in slot_layout[u]:
                targets[slot] = v
                slot_edge[slot] = edge_index[(u, v)]
                slot += 1
            offsets[u + 1] = slot
        hits = kernel.unicast_counts(
            g.node_count, offsets, targets, slot_edge, edge_p,
            source, cfg.trials, cfg.seed, cfg.model == "urf",
        )
    return EstimateTable(
        model=cfg.model,
        seed=cfg.seed,
        trials=cfg.trials,
        hits={v: int(hits[v]) for v in range(g.node_count)},
    )
