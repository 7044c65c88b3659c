"""Shared fixtures and small independent oracles used across the test suite.

The oracles here deliberately avoid the library's own algebra: they model the
forwarding processes literally (enumerating edge states, try orders, or walks)
so that agreement with the fast implementations is meaningful evidence.
"""

from __future__ import annotations

import itertools
import math
import random

from meshrel import Dodag

PHI64 = 0x9E3779B97F4A7C15
MASK64 = (1 << 64) - 1


def diamond(p: float = 0.7) -> Dodag:
    """Source 3 feeds relays 1 and 2, both of which feed sink 0."""
    return Dodag(4, ((1, 0, p), (2, 0, p), (3, 1, p), (3, 2, p)), sink=0, source=3)


def chain(probs) -> Dodag:
    """Single path n-1 -> ... -> 1 -> 0 with the given link probabilities."""
    n = len(probs) + 1
    edges = tuple((i + 1, i, p) for i, p in enumerate(probs))
    return Dodag(n, edges, sink=0, source=n - 1)


def random_dodag(
    rng: random.Random,
    max_nodes: int = 8,
    max_edges: int = 12,
    p_lo: float = 0.05,
    p_hi: float = 0.99,
) -> Dodag:
    """Random DAG: edges always point from later to earlier in a shuffled order.

    The first node in the order is the sink (guaranteed no outgoing edges) and
    the last is the source.  Connectivity is not guaranteed; metrics must cope
    with unreachable nodes.
    """
    n = rng.randint(2, max_nodes)
    order = list(range(n))
    rng.shuffle(order)
    rank = {v: i for i, v in enumerate(order)}
    pairs = [(u, v) for u in range(n) for v in range(n) if rank[u] > rank[v]]
    rng.shuffle(pairs)
    count = rng.randint(1, min(max_edges, len(pairs)))
    edges = tuple((u, v, rng.uniform(p_lo, p_hi)) for u, v in pairs[:count])
    return Dodag(n, edges, sink=order[0], source=order[-1])


def four_node_shapes(seed: int = 7):
    """Every DAG shape on 4 nodes: all subsets of the 6 descending pairs.

    Probabilities are drawn from a seeded generator so the set is fixed.
    """
    rng = random.Random(seed)
    pairs = [(u, v) for u in range(4) for v in range(u)]
    graphs = []
    for mask in range(1 << len(pairs)):
        edges = tuple(
            (u, v, rng.uniform(0.05, 0.95))
            for i, (u, v) in enumerate(pairs)
            if mask >> i & 1
        )
        graphs.append(Dodag(4, edges, sink=0, source=3))
    return graphs


def edge_states(graph: Dodag):
    """Yield (probability, up_set) over all 2^E independent edge outcomes."""
    edges = graph.edges
    for mask in range(1 << len(edges)):
        prob = 1.0
        up = set()
        for i, (u, v, p) in enumerate(edges):
            if mask >> i & 1:
                prob *= p
                up.add((u, v))
            else:
                prob *= 1.0 - p
        if prob > 0.0:
            yield prob, up


def urf_state_oracle(graph: Dodag, source: int) -> float:
    """Literal retry-forwarding model: condition on edge states, then average
    the walk over uniformly random link choices.

    Given the up/down state of every link, the walker standing at u retries
    its outgoing links in a uniformly random order until one succeeds, so it
    moves to each up neighbour with probability 1/#up.  No up link: stuck.
    """
    out = {u: [] for u in range(graph.node_count)}
    for u, v, _ in graph.edges:
        out[u].append(v)

    total = 0.0
    for prob, up in edge_states(graph):
        memo: dict[int, float] = {}

        def reach(u: int) -> float:
            if u == graph.sink:
                return 1.0
            if u in memo:
                return memo[u]
            live = [v for v in out[u] if (u, v) in up]
            memo[u] = sum(reach(v) for v in live) / len(live) if live else 0.0
            return memo[u]

        total += prob * reach(source)
    return total


def rrurf_state_oracle(graph: Dodag, source: int, try_orders) -> float:
    """Literal fixed-order retry model: given each edge state, the walker at u
    takes the first up link in its fixed try order (deterministic walk)."""
    total = 0.0
    for prob, up in edge_states(graph):
        u = source
        seen = set()
        while u != graph.sink and u not in seen:
            seen.add(u)
            nxt = None
            for v in try_orders.get(u, ()):
                if (u, v) in up:
                    nxt = v
                    break
            if nxt is None:
                break
            u = nxt
        if u == graph.sink:
            total += prob
    return total


def weight_permutation_oracle(probs):
    """First-success probabilities by brute force over try orders and states.

    For k independent links, averages over all k! try orders and all 2^k
    up/down states the indicator that link i is the first up link tried.
    Returns a list aligned with probs.
    """
    k = len(probs)
    totals = [0.0] * k
    for perm in itertools.permutations(range(k)):
        for mask in range(1 << k):
            prob = 1.0
            for i, p in enumerate(probs):
                prob *= p if mask >> i & 1 else 1.0 - p
            for i in perm:
                if mask >> i & 1:
                    totals[i] += prob
                    break
    fact = math.factorial(k)
    return [t / fact for t in totals]


def splitmix64_reference(state: int):
    """Published splitmix64 stepping, kept verbatim as an independent check."""
    while True:
        state = (state + PHI64) & MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        yield z ^ (z >> 31)
