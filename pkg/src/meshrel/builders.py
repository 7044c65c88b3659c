"""Topology builders: turn an undirected connectivity graph into a routing DAG.

All three builders root the topology at a sink and only ever orient edges in
ways that cannot close a cycle:

* :func:`build_minhop` — classic shortest-hop layering: every edge points
  from the higher BFS level to the lower one; equal-level edges are oriented
  toward the endpoint with the better best-link to the level below (dropped on
  exact ties).
* :func:`build_urf_gg` — centralized greedy: one node joins per step, always
  the one whose best achievable reliability over already-joined neighbors is
  highest.
* :func:`build_urf_dt` — round-synchronous joining against a decreasing
  threshold schedule: a node may join at mesh hop ``h`` in round ``k`` only if
  its best reliability over lower-hop joined neighbors clears the schedule
  entry for age ``k - h + 1``.  Nodes therefore hold out for good parents
  early and settle for worse ones as their thresholds decay.  After each
  round, same-hop cross links are added toward strictly more reliable
  neighbors.

Downstream link sets are picked by :func:`select_downstream`, either exactly
(subset enumeration, capped) or by the default greedy pass over candidates
sorted lexicographically by ``(reliability, link probability)``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import CapError, FormatError, GraphError
from .graph import ConnectivityGraph, Dodag
from .urf import downstream_reliability, urf_sink

#: A candidate only enters a LEX selection if it improves reliability by this.
IMPROVEMENT_EPS = 1e-12

#: EXACT selection enumerates subsets; refuse beyond this many candidates.
EXACT_CANDIDATE_CAP = 15

SELECT_MODES = ("lex", "exact")
CROSS_LINK_MODES = ("round", "final")


@dataclass(frozen=True)
class ThresholdSchedule:
    """Join thresholds indexed by age: ``tau[0]`` binds first, tail persists.

    ``tau`` must be non-increasing.  A node whose join age ``m`` (rounds since
    the height became eligible) exceeds the schedule length keeps being held
    to the final entry.
    """

    tau: tuple[float, ...]
    rounds: int = 100

    def __post_init__(self) -> None:
        if not self.tau:
            raise FormatError("threshold schedule is empty")
        if self.rounds < 1:
            raise FormatError(f"rounds must be >= 1, got {self.rounds}")
        cleaned = []
        for value in self.tau:
            value = float(value)
            if not 0.0 <= value <= 1.0:
                raise FormatError(f"threshold {value!r} outside [0, 1]")
            cleaned.append(value)
        for earlier, later in zip(cleaned, cleaned[1:]):
            if later > earlier:
                raise FormatError(
                    f"thresholds must be non-increasing, got {earlier} -> {later}"
                )
        object.__setattr__(self, "tau", tuple(cleaned))

    def threshold(self, age: int) -> float | None:
        """Threshold for join age ``age`` (1-based); None when not yet eligible."""
        if age < 1:
            return None
        return self.tau[min(age, len(self.tau)) - 1]

    @classmethod
    def parse(cls, text: str, rounds: int = 100) -> "ThresholdSchedule":
        """Parse ``start:step:end`` (inclusive sweep) or a comma list."""
        text = text.strip()
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise FormatError(f"expected start:step:end, got {text!r}")
            try:
                start, step, end = (float(p) for p in parts)
            except ValueError:
                raise FormatError(f"non-numeric schedule component in {text!r}") from None
            if step >= 0:
                raise FormatError(f"schedule step must be negative, got {step}")
            if end > start:
                raise FormatError(f"schedule end {end} above start {start}")
            values = []
            i = 0
            while True:
                value = round(start + i * step, 12)
                if value < end - 1e-9:
                    break
                values.append(value)
                i += 1
                if i > 1_000_000:
                    raise FormatError(f"schedule {text!r} expands past 10^6 entries")
            return cls(tuple(values), rounds)
        try:
            values = tuple(float(p) for p in text.split(","))
        except ValueError:
            raise FormatError(f"non-numeric threshold in {text!r}") from None
        return cls(values, rounds)


@dataclass(frozen=True)
class BuildResult:
    """A built topology plus per-node bookkeeping.

    ``hop`` is the mesh hop count assigned at join time (sink: 0) and
    ``reliability`` the sink-rooted retry-flow metric recomputed on the final
    topology.  Nodes that never joined appear in ``unjoined`` and carry no hop.
    """

    topology: Dodag
    hop: Mapping[int, int]
    join_round: Mapping[int, int]
    reliability: Mapping[int, float]
    unjoined: frozenset[int]


def select_downstream(
    candidates: Sequence[tuple[int, float, float]],
    mode: str = "lex",
    *,
    exact_cap: int = EXACT_CANDIDATE_CAP,
) -> tuple[tuple[int, ...], float]:
    """Choose the outgoing link set from ``(node, reliability, link p)`` triples.

    Returns the chosen node ids (sorted) and the reliability they achieve.
    ``exact`` enumerates every nonempty subset (ties: fewer links, then the
    lexicographically smallest id set); ``lex`` sorts candidates by
    ``(reliability, p)`` descending and keeps each one only if it strictly
    improves the running reliability.  Both modes exclude candidates whose
    inclusion lowers the metric; neither returns an empty set.
    """
    if not candidates:
        raise GraphError("select_downstream: no candidates")
    if mode not in SELECT_MODES:
        raise GraphError(f"unknown selection mode {mode!r}; choose from {SELECT_MODES}")
    if mode == "exact":
        if len(candidates) > exact_cap:
            raise CapError(
                f"{len(candidates)} candidates exceed exact-selection cap "
                f"{exact_cap}; use lex selection",
                cap=exact_cap,
                observed=len(candidates),
            )
        ordered = sorted(candidates, key=lambda c: c[0])
        best_ids: tuple[int, ...] | None = None
        best_value = -1.0
        for mask in range(1, 1 << len(ordered)):
            subset = [ordered[i] for i in range(len(ordered)) if mask >> i & 1]
            value = downstream_reliability([(rel, p) for _, rel, p in subset])
            ids = tuple(node for node, _, _ in subset)
            if best_ids is None or value > best_value:
                better = True
            elif value == best_value:
                better = len(ids) < len(best_ids) or (
                    len(ids) == len(best_ids) and ids < best_ids
                )
            else:
                better = False
            if better:
                best_ids, best_value = ids, value
        assert best_ids is not None
        return best_ids, best_value

    ordered = sorted(candidates, key=lambda c: (-c[1], -c[2], c[0]))
    chosen: list[tuple[int, float, float]] = []
    value = 0.0
    for cand in ordered:
        trial = chosen + [cand]
        trial_value = downstream_reliability([(rel, p) for _, rel, p in trial])
        if trial_value > value + IMPROVEMENT_EPS:
            chosen = trial
            value = trial_value
    if not chosen:
        chosen = [ordered[0]]
        value = downstream_reliability([(ordered[0][1], ordered[0][2])])
    return tuple(sorted(node for node, _, _ in chosen)), value


def _edge_probabilities(cg: ConnectivityGraph) -> dict[tuple[int, int], float]:
    table: dict[tuple[int, int], float] = {}
    for u, v, p in cg.edges:
        table[(u, v)] = p
        table[(v, u)] = p
    return table


def _check_sink(cg: ConnectivityGraph, sink: int) -> None:
    if not 0 <= sink < cg.node_count:
        raise GraphError(f"sink {sink} out of range for {cg.node_count} nodes")


def _finish(
    cg: ConnectivityGraph,
    sink: int,
    edges: list[tuple[int, int, float]],
    hop: dict[int, int],
    join_round: dict[int, int],
) -> BuildResult:
    topology = Dodag(cg.node_count, tuple(edges), sink)
    reliability = urf_sink(topology)
    unjoined = frozenset(range(cg.node_count)) - set(hop)
    return BuildResult(
        topology=topology,
        hop=dict(hop),
        join_round=dict(join_round),
        reliability=dict(reliability.values),
        unjoined=unjoined,
    )


def build_minhop(cg: ConnectivityGraph, sink: int) -> BuildResult:
    """Minimum-hop layering of the whole connectivity graph.

    Every edge between different BFS levels points from the higher level to
    the lower one.  An equal-level edge points toward the endpoint whose best
    link probability into the level below is higher; exact ties drop the edge.
    """
    _check_sink(cg, sink)
    hop: dict[int, int] = {sink: 0}
    queue = deque([sink])
    while queue:
        u = queue.popleft()
        for v, _ in cg.neighbors(u):
            if v not in hop:
                hop[v] = hop[u] + 1
                queue.append(v)

    best_link_down: dict[int, float] = {}
    for u, level in hop.items():
        if level == 0:
            continue
        best_link_down[u] = max(
            p for v, p in cg.neighbors(u) if hop[v] == level - 1
        )

    edges: list[tuple[int, int, float]] = []
    for u, v, p in cg.edges:
        if u not in hop:
            continue
        if hop[u] > hop[v]:
            edges.append((u, v, p))
        elif hop[v] > hop[u]:
            edges.append((v, u, p))
        else:
            down_u, down_v = best_link_down[u], best_link_down[v]
            if down_u < down_v:
                edges.append((u, v, p))
            elif down_v < down_u:
                edges.append((v, u, p))
            # exact tie: the edge stays out of the topology
    return _finish(cg, sink, edges, hop, dict(hop))


def build_urf_gg(cg: ConnectivityGraph, sink: int, *, mode: str = "lex") -> BuildResult:
    """Greedy global join order: always admit the most reliable next node.

    Every unjoined node evaluates its best link set over already-joined
    neighbors; the node achieving the highest reliability joins (tie: lower
    id), fixing its links and hop count.  Repeats until no unjoined node has a
    joined neighbor.
    """
    _check_sink(cg, sink)
    prob = _edge_probabilities(cg)
    joined_value: dict[int, float] = {sink: 1.0}
    hop: dict[int, int] = {sink: 0}
    join_round: dict[int, int] = {}
    edges: list[tuple[int, int, float]] = []

    def evaluate(u: int) -> tuple[tuple[int, ...], float]:
        candidates = [
            (v, joined_value[v], p)
            for v, p in cg.neighbors(u)
            if v in joined_value
        ]
        return select_downstream(candidates, mode)

    frontier: dict[int, tuple[tuple[int, ...], float]] = {
        v: evaluate(v) for v, _ in cg.neighbors(sink)
    }
    step = 0
    while frontier:
        u = min(frontier, key=lambda node: (-frontier[node][1], node))
        chosen, value = frontier.pop(u)
        step += 1
        for v in chosen:
            edges.append((u, v, prob[(u, v)]))
        joined_value[u] = value
        hop[u] = 1 + max(hop[v] for v in chosen)
        join_round[u] = step
        for w, _ in cg.neighbors(u):
            if w not in joined_value:
                frontier[w] = evaluate(w)
    return _finish(cg, sink, edges, hop, join_round)


def build_urf_dt(
    cg: ConnectivityGraph,
    sink: int,
    schedule: ThresholdSchedule,
    *,
    mode: str = "lex",
    cross_links: str = "round",
) -> BuildResult:
    """Round-synchronous joining against a decreasing threshold schedule.

    Each round every unjoined node scans candidate hop counts ``h`` from just
    above its lowest joined neighbor to just above its highest; for each ``h``
    it selects links among joined neighbors with a *smaller* hop count and
    joins at the first ``h`` whose reliability clears the schedule entry for
    age ``k - h + 1``.  Joins land simultaneously and become visible to
    neighbors in the next round.  Cross links between same-hop neighbors are
    added (toward the strictly more reliable node) after each round, or once
    at the end with ``cross_links="final"``; they never alter hop counts or
    join decisions.
    """
    if cross_links not in CROSS_LINK_MODES:
        raise GraphError(
            f"unknown cross-link mode {cross_links!r}; choose from {CROSS_LINK_MODES}"
        )
    _check_sink(cg, sink)
    prob = _edge_probabilities(cg)
    hop: dict[int, int] = {sink: 0}
    join_value: dict[int, float] = {sink: 1.0}
    join_round: dict[int, int] = {}
    edges: list[tuple[int, int, float]] = []
    unjoined = set(range(cg.node_count)) - {sink}
    evals: dict[int, list[tuple[int, float, tuple[int, ...]]]] = {}
    dirty: set[int] = set()
    paired: set[tuple[int, int]] = set()

    def hop_options(u: int) -> list[tuple[int, float, tuple[int, ...]]]:
        neighbors = [(v, p) for v, p in cg.neighbors(u) if v in hop]
        if not neighbors:
            return []
        levels = [hop[v] for v, _ in neighbors]
        options = []
        for h in range(min(levels) + 1, max(levels) + 2):
            candidates = [
                (v, join_value[v], p) for v, p in neighbors if hop[v] < h
            ]
            chosen, value = select_downstream(candidates, mode)
            options.append((h, value, chosen))
        return options

    def cross_link(u: int) -> None:
        """Pair ``u`` with every joined same-hop neighbor exactly once."""
        for v, p in cg.neighbors(u):
            if v not in hop or hop[v] != hop[u]:
                continue
            pair = (u, v) if u < v else (v, u)
            if pair in paired:
                continue
            paired.add(pair)
            if join_value[v] > join_value[u]:
                edges.append((u, v, p))
            elif join_value[u] > join_value[v]:
                edges.append((v, u, p))

    for k in range(1, schedule.rounds + 1):
        if not unjoined:
            break
        joiners: list[tuple[int, int, float, tuple[int, ...]]] = []
        for u in sorted(unjoined):
            if u in dirty or u not in evals:
                options = hop_options(u)
                dirty.discard(u)
                if not options:
                    evals.pop(u, None)
                    continue
                evals[u] = options
            for h, value, chosen in evals[u]:
                age = k - h + 1
                threshold = schedule.threshold(age)
                if threshold is None:
                    continue
                if value >= threshold:
                    joiners.append((u, h, value, chosen))
                    break
        for u, h, value, chosen in joiners:
            hop[u] = h
            join_value[u] = value
            join_round[u] = k
            unjoined.discard(u)
            evals.pop(u, None)
            for v in chosen:
                edges.append((u, v, prob[(u, v)]))
            for w, _ in cg.neighbors(u):
                if w in unjoined:
                    dirty.add(w)
        if cross_links == "round":
            for u, _, _, _ in sorted(joiners):
                cross_link(u)
    if cross_links == "final":
        for u in sorted(hop):
            cross_link(u)
    return _finish(cg, sink, edges, hop, join_round)
