"""Random and parametric scenario generators.

:func:`random_geometric` places nodes uniformly in a square (rejecting
placements closer than a minimum spacing), then creates undirected links by
distance: certain below ``r1``, impossible beyond ``r2``, and by a falloff
rule in between.  Link probabilities are drawn uniformly from a range.  The
whole procedure retries with a derived seed until the graph comes out
connected.  Node 0 is the conventional sink.

Draw order (the determinism contract for a given seed): all positions first
(including rejected ones), then one existence draw per pair with ``r1 <= d <=
r2`` in ascending ``(i, j)`` order, with the link's probability drawn
immediately after a successful existence draw.

:func:`ladder` builds the parametric relay-column DAG: a source fans out to
the first column, consecutive columns connect forward (all pairs, or one
disjoint chain per row), and the last column feeds the sink.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, GenerationError, GraphError
from .graph import ConnectivityGraph, Dodag

#: Stop looking for a valid node placement after this many rejections.
PLACEMENT_REJECTION_CAP = 100_000

#: Stop regenerating a disconnected graph after this many attempts.
CONNECTIVITY_ATTEMPT_CAP = 100

BAND_RULES = ("linear", "half")


@dataclass(frozen=True)
class GeoParams:
    """Parameters of the random geometric scenario."""

    seed: int
    node_count: int = 40
    side: float = 10.0
    min_spacing: float = 0.5
    r1: float = 2.0
    r2: float = 3.0
    p_lo: float = 0.7
    p_hi: float = 1.0
    band_rule: str = "linear"

    def __post_init__(self) -> None:
        if self.node_count < 2:
            raise FormatError(f"node_count must be >= 2, got {self.node_count}")
        if self.side <= 0:
            raise FormatError(f"side must be positive, got {self.side}")
        if self.min_spacing < 0:
            raise FormatError(f"min_spacing must be >= 0, got {self.min_spacing}")
        if not 0 < self.r1 <= self.r2:
            raise FormatError(f"need 0 < r1 <= r2, got r1={self.r1}, r2={self.r2}")
        if not 0.0 <= self.p_lo <= self.p_hi <= 1.0:
            raise FormatError(
                f"need 0 <= p_lo <= p_hi <= 1, got [{self.p_lo}, {self.p_hi}]"
            )
        if self.band_rule not in BAND_RULES:
            raise FormatError(
                f"unknown band rule {self.band_rule!r}; choose from {BAND_RULES}"
            )
        if not 0 <= self.seed < 1 << 64:
            raise FormatError("seed must fit in an unsigned 64-bit integer")


def _place_nodes(params: GeoParams, rng: np.random.Generator) -> list[tuple[float, float]]:
    positions: list[tuple[float, float]] = []
    spacing_sq = params.min_spacing**2
    rejections = 0
    while len(positions) < params.node_count:
        x = float(rng.uniform(0.0, params.side))
        y = float(rng.uniform(0.0, params.side))
        if all((x - px) ** 2 + (y - py) ** 2 >= spacing_sq for px, py in positions):
            positions.append((x, y))
            continue
        rejections += 1
        if rejections > PLACEMENT_REJECTION_CAP:
            raise GenerationError(
                f"placement infeasible: {PLACEMENT_REJECTION_CAP} rejections for "
                f"{params.node_count} nodes with spacing {params.min_spacing} "
                f"in a {params.side} x {params.side} area"
            )
    return positions


def _attempt(params: GeoParams, rng: np.random.Generator) -> ConnectivityGraph:
    positions = _place_nodes(params, rng)
    edges = []
    for i in range(params.node_count):
        for j in range(i + 1, params.node_count):
            d = math.dist(positions[i], positions[j])
            if d > params.r2:
                continue
            if d >= params.r1:
                if params.r1 == params.r2:  # degenerate band: hard-disk model
                    continue
                if params.band_rule == "linear":
                    accept = (params.r2 - d) / (params.r2 - params.r1)
                else:
                    accept = 0.5
                if not rng.random() < accept:
                    continue
            p = float(rng.uniform(params.p_lo, params.p_hi))
            edges.append((i, j, p))
    return ConnectivityGraph(params.node_count, tuple(edges), tuple(positions))


def random_geometric(params: GeoParams) -> ConnectivityGraph:
    """Generate a connected random geometric connectivity graph.

    Disconnected attempts are regenerated with a seed derived from
    ``(params.seed, attempt index)`` up to :data:`CONNECTIVITY_ATTEMPT_CAP`
    times, keeping the result a pure function of the seed.
    """
    for attempt in range(CONNECTIVITY_ATTEMPT_CAP):
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=params.seed, spawn_key=(attempt,))
        )
        graph = _attempt(params, rng)
        if graph.is_connected():
            return graph
    raise GenerationError(
        f"no connected graph within {CONNECTIVITY_ATTEMPT_CAP} attempts "
        f"(seed {params.seed}); loosen the radii or shrink the area"
    )


def ladder(width: int, length: int, p: float, *, wiring: str = "interleaved") -> Dodag:
    """Relay-column DAG: source -> columns of relays -> sink.

    ``interleaved`` connects consecutive columns with every forward pair;
    ``disjoint`` keeps one independent chain per row.  Every link gets the
    same probability ``p``.  Node ids: source 0, then columns left to right
    (top to bottom inside a column), then the sink.
    """
    if width < 1 or length < 1:
        raise GraphError(f"width and length must be >= 1, got {width} x {length}")
    if wiring not in ("interleaved", "disjoint"):
        raise GraphError(f"unknown wiring {wiring!r}")
    source = 0
    sink = width * length + 1

    def relay(column: int, row: int) -> int:
        return 1 + column * width + row

    edges = []
    for row in range(width):
        edges.append((source, relay(0, row), p))
    for column in range(length - 1):
        for row in range(width):
            if wiring == "interleaved":
                for next_row in range(width):
                    edges.append((relay(column, row), relay(column + 1, next_row), p))
            else:
                edges.append((relay(column, row), relay(column + 1, row), p))
    for row in range(width):
        edges.append((relay(length - 1, row), sink, p))
    return Dodag(width * length + 2, tuple(edges), sink, source)
