"""Unicast retry-flow reliability.

Model: a node holding the packet tries its outgoing links one at a time in a
uniformly random order; each link is tried once and delivers with its
probability; the packet moves over the first link that works and is lost if
none do.  The probability that node ``u``'s packet traverses a particular
link ``(u, v)`` is the link's *traversal weight*.  Weights are computed two
independent ways:

* :func:`urf_weights_subset` — direct sum over all subsets of the sibling
  links: the target link wins against ``k`` working siblings with probability
  ``p / (k + 1)``.
* :func:`urf_weights_poly` — closed form ``p * integral_0^1 prod(1 - p_e x) dx``
  over the sibling links, evaluated by expanding the product polynomial and
  integrating term by term.  Linear in the out-degree after the expansion.

End-to-end delivery probabilities follow by recursion over a routing DAG,
either source-rooted (:func:`urf_source`, probability the packet injected at
the source visits each node) or sink-rooted (:func:`urf_sink`, probability a
packet starting at each node reaches the sink).  :func:`rrurf_sink` scores the
variant where links are tried in a fixed order of decreasing downstream
reliability instead of a random order.  :func:`urf_bounds` propagates
per-link probability intervals to per-node reliability intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import CapError, GraphError
from .graph import (
    RRURF,
    URF,
    URF_HI,
    URF_LO,
    Dodag,
    IntervalGraph,
    MetricTable,
    topological_order,
)

#: Over-sum guard for interval weight upper bounds (pure float-noise slack).
OVERSUM_SLACK = 1e-12

#: Default out-degree cap for the exponential subset-sum weight method.
SUBSET_OUTDEGREE_CAP = 20


@dataclass(frozen=True)
class WeightTable:
    """Per-link traversal weights plus each node's drop probability."""

    weights: Mapping[tuple[int, int], float]
    drop: Mapping[int, float]

    def out_weights(self, u: int) -> dict[int, float]:
        return {v: w for (a, v), w in self.weights.items() if a == u}


def _clamp_unit(x: float) -> float:
    return 0.0 if x < 0.0 else (1.0 if x > 1.0 else x)


def _integral_weight(p_link: float, siblings: Sequence[float]) -> float:
    """``p_link * integral_0^1 prod_e (1 - p_e x) dx`` over sibling links.

    The product expands to a polynomial ``sum_k c_k x^k``; the integral is
    then ``sum_k c_k / (k + 1)``, accumulated with exact rounding.
    """
    coeffs = [1.0]
    for q in siblings:
        prev = 0.0
        for i in range(len(coeffs)):
            coeffs[i], prev = coeffs[i] - q * prev, coeffs[i]
        coeffs.append(-q * prev)
    return p_link * math.fsum(c / (k + 1) for k, c in enumerate(coeffs))


def _weights_poly(targets: Sequence[tuple[int, float]]) -> dict[int, float]:
    out: dict[int, float] = {}
    probs = [p for _, p in targets]
    for i, (v, p) in enumerate(targets):
        out[v] = _integral_weight(p, probs[:i] + probs[i + 1 :])
    return out


def _weights_subset(targets: Sequence[tuple[int, float]]) -> dict[int, float]:
    """Literal subset sum: enumerate every up/down state of the siblings."""
    out: dict[int, float] = {}
    probs = [p for _, p in targets]
    for i, (v, p) in enumerate(targets):
        siblings = np.array(probs[:i] + probs[i + 1 :], dtype=np.float64)
        k = len(siblings)
        masks = np.arange(1 << k, dtype=np.uint32)
        up_product = np.ones(1 << k, dtype=np.float64)
        down_product = np.ones(1 << k, dtype=np.float64)
        up_count = np.zeros(1 << k, dtype=np.float64)
        for b in range(k):
            up = ((masks >> b) & 1).astype(bool)
            up_product[up] *= siblings[b]
            down_product[~up] *= 1.0 - siblings[b]
            up_count[up] += 1.0
        out[v] = p * float(np.sum(up_product * down_product / (up_count + 1.0)))
    return out


def _partial_table(u: int, weights: dict[int, float]) -> WeightTable:
    return WeightTable(
        weights={(u, v): w for v, w in sorted(weights.items())},
        drop={u: 1.0 - math.fsum(weights.values())},
    )


def urf_weights_poly(g: Dodag, u: int) -> WeightTable:
    """Traversal weights of ``u``'s out-links via the polynomial integral."""
    return _partial_table(u, _weights_poly(g.out_edges(u)))


def urf_weights_subset(
    g: Dodag, u: int, *, outdegree_cap: int = SUBSET_OUTDEGREE_CAP
) -> WeightTable:
    """Traversal weights of ``u``'s out-links via explicit subset enumeration.

    Cost grows as ``2^outdegree``; out-degrees above ``outdegree_cap`` are
    refused (use :func:`urf_weights_poly`, which scales polynomially).
    """
    degree = g.outdegree(u)
    if degree > outdegree_cap:
        raise CapError(
            f"node {u} out-degree {degree} exceeds subset-sum cap {outdegree_cap}; "
            "use the polynomial weight method",
            cap=outdegree_cap,
            observed=degree,
        )
    return _partial_table(u, _weights_subset(g.out_edges(u)))


def urf_weight_table(
    g: Dodag,
    *,
    method: str = "poly",
    outdegree_cap: int = SUBSET_OUTDEGREE_CAP,
) -> WeightTable:
    """Traversal weights for every link, plus per-node drop probabilities."""
    if method not in ("poly", "subset"):
        raise GraphError(f"unknown weight method {method!r}")
    weights: dict[tuple[int, int], float] = {}
    drop: dict[int, float] = {}
    for u in range(g.node_count):
        if method == "subset":
            part = urf_weights_subset(g, u, outdegree_cap=outdegree_cap)
        else:
            part = urf_weights_poly(g, u)
        weights.update(part.weights)
        drop[u] = part.drop[u]
    return WeightTable(weights=weights, drop=drop)


def downstream_reliability(candidates: Sequence[tuple[float, float]]) -> float:
    """One recursion step: combine ``(downstream value, link p)`` pairs.

    Returns the reliability of a node whose outgoing links are exactly the
    given candidates, using polynomial traversal weights.
    """
    probs = [p for _, p in candidates]
    terms = []
    for i, (value, p) in enumerate(candidates):
        terms.append(_integral_weight(p, probs[:i] + probs[i + 1 :]) * value)
    return _clamp_unit(math.fsum(terms))


def urf_source(g: Dodag, source: int, *, weights: WeightTable | None = None) -> MetricTable:
    """Probability that a packet injected at ``source`` visits each node."""
    if weights is None:
        weights = urf_weight_table(g)
    values = {v: 0.0 for v in range(g.node_count)}
    values[source] = 1.0
    for v in topological_order(g):
        if v == source:
            continue
        acc = math.fsum(
            values[u] * weights.weights[(u, v)] for u, _ in g.in_edges(v)
        )
        if acc:
            values[v] = _clamp_unit(acc)
    return MetricTable(URF, values)


def urf_sink(
    g: Dodag, sink: int | None = None, *, weights: WeightTable | None = None
) -> MetricTable:
    """Probability that a packet starting at each node reaches the sink.

    Non-sink nodes without outgoing edges score 0: a packet arriving there is
    trapped by construction.
    """
    sink = g.sink if sink is None else sink
    if g.outdegree(sink) != 0:
        raise GraphError(f"sink {sink} has outgoing edges")
    if weights is None:
        weights = urf_weight_table(g)
    values = {v: 0.0 for v in range(g.node_count)}
    values[sink] = 1.0
    for u in reversed(topological_order(g)):
        if u == sink:
            continue
        acc = math.fsum(
            weights.weights[(u, v)] * values[v] for v, _ in g.out_edges(u)
        )
        if acc:
            values[u] = _clamp_unit(acc)
    return MetricTable(URF, values)


def _try_order(
    out_edges: Sequence[tuple[int, float]], values: Mapping[int, float]
) -> list[tuple[int, float]]:
    """Fixed retry order: best downstream reliability first.

    Ties break toward the higher link probability, then the lower node id.
    """
    return sorted(out_edges, key=lambda vp: (-values[vp[0]], -vp[1], vp[0]))


def rrurf_sink(g: Dodag, sink: int | None = None) -> MetricTable:
    """Sink-rooted reliability when links are tried in a fixed best-first order.

    Each node tries its links in order of decreasing downstream reliability;
    the weight of the i-th link is ``p_i`` times the probability that every
    earlier link failed.
    """
    sink = g.sink if sink is None else sink
    if g.outdegree(sink) != 0:
        raise GraphError(f"sink {sink} has outgoing edges")
    values = {v: 0.0 for v in range(g.node_count)}
    values[sink] = 1.0
    for u in reversed(topological_order(g)):
        if u == sink:
            continue
        remaining = 1.0
        terms = []
        for v, p in _try_order(g.out_edges(u), values):
            terms.append(remaining * p * values[v])
            remaining *= 1.0 - p
        if terms:
            values[u] = _clamp_unit(math.fsum(terms))
    return MetricTable(RRURF, values)


def rrurf_try_orders(
    g: Dodag, table: MetricTable
) -> dict[int, tuple[tuple[int, float], ...]]:
    """Per-node link try order induced by a sink-rooted RRURF table."""
    return {
        u: tuple(_try_order(g.out_edges(u), table.values))
        for u in range(g.node_count)
    }


@dataclass(frozen=True)
class UrfBounds:
    """Reliability envelope from per-link probability intervals.

    ``oversum_nodes`` flags nodes whose upper-bound traversal weights sum past
    1: the upper envelope stays correct but is slack there (no single
    probability assignment realizes it).
    """

    lo: MetricTable
    hi: MetricTable
    oversum_nodes: tuple[int, ...]


def urf_bounds(ig: IntervalGraph, sink: int | None = None) -> UrfBounds:
    """Lower/upper sink-rooted reliability under interval link probabilities.

    A link's weight is largest when its own probability sits at the upper
    bound and every sibling at the lower bound, and vice versa; substituting
    those extremes and running the sink recursion on each side yields the
    envelope.
    """
    sink = ig.sink if sink is None else sink
    g_lo = ig.at_lo()
    if g_lo.outdegree(sink) != 0:
        raise GraphError(f"sink {sink} has outgoing edges")
    order = topological_order(g_lo)

    lo_w: dict[tuple[int, int], float] = {}
    hi_w: dict[tuple[int, int], float] = {}
    oversum: list[int] = []
    out_by_node: dict[int, list[tuple[int, float, float]]] = {
        u: [] for u in range(ig.node_count)
    }
    for u, v, lo, hi in ig.edges:
        out_by_node[u].append((v, lo, hi))
    for u, links in out_by_node.items():
        lows = [lo for _, lo, _ in links]
        highs = [hi for _, _, hi in links]
        for i, (v, lo, hi) in enumerate(links):
            lo_w[(u, v)] = _integral_weight(lo, highs[:i] + highs[i + 1 :])
            hi_w[(u, v)] = _integral_weight(hi, lows[:i] + lows[i + 1 :])
        if links and math.fsum(hi_w[(u, v)] for v, _, _ in links) > 1.0 + OVERSUM_SLACK:
            oversum.append(u)

    def sweep(weights: Mapping[tuple[int, int], float]) -> dict[int, float]:
        values = {v: 0.0 for v in range(ig.node_count)}
        values[sink] = 1.0
        for u in reversed(order):
            if u == sink:
                continue
            acc = math.fsum(
                weights[(u, v)] * values[v] for v, _, _ in out_by_node[u]
            )
            if acc:
                values[u] = _clamp_unit(acc)
        return values

    return UrfBounds(
        lo=MetricTable(URF_LO, sweep(lo_w)),
        hi=MetricTable(URF_HI, sweep(hi_w)),
        oversum_nodes=tuple(sorted(oversum)),
    )
