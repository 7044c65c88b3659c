"""Graph file format, canonical serialization, and report writing.

The on-disk graph format is a single JSON document::

    {
      "directed": true,
      "edges": [
        {"p": 0.89999999999999991, "u": 0, "v": 1},
        ...
      ],
      "nodes": [
        {"id": 0, "x": 1.5, "y": 2},
        ...
      ],
      "sink": 0,
      "source": 3
    }

Interval graphs replace ``"p"`` with ``"p_lo"``/``"p_hi"`` on every edge.
Node ids may be any integers (dense or not); they map to contiguous indices
in ascending id order when converted to in-memory graphs.

Serialization is canonical: keys sorted, two-space indent, one node or edge
object per line, floats printed with 17 significant digits (enough to
reconstruct the exact double).  Parsing a canonical file and re-serializing
it reproduces the input byte for byte, which is what makes generated
artifacts diffable and reruns checkable by hash.

Reports are CSV with floats at 12 significant digits.  All file writes go
through a write-to-temp-then-rename step so a crash never leaves a partial
file behind.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .errors import FormatError, GraphError, IoError
from .graph import ConnectivityGraph, Dodag, IntervalGraph

_TOP_KEYS = {"directed", "edges", "nodes", "sink", "source"}


def format_float(value: float, digits: int = 17) -> str:
    """Format a finite float with the given number of significant digits."""
    value = float(value)
    if not math.isfinite(value):
        raise FormatError(f"non-finite number {value!r} cannot be serialized")
    return "%.*g" % (digits, value)


def _require_int(value: object, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise FormatError(f"{what} must be an integer, got {value!r}")
    return value


def _require_number(value: object, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FormatError(f"{what} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise FormatError(f"{what} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class GraphFile:
    """Validated in-memory image of a graph file.

    ``nodes`` holds the (ascending) node ids as written in the file; ``edges``
    holds ``(u, v, p)`` or ``(u, v, p_lo, p_hi)`` tuples over those ids, in
    canonical order.  ``positions`` is either ``None`` or one ``(x, y)`` pair
    per node, aligned with ``nodes``.
    """

    directed: bool
    sink: int
    nodes: tuple[int, ...]
    edges: tuple[tuple, ...]
    source: int | None = None
    positions: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self) -> None:
        ids = [_require_int(n, "node id") for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise FormatError("duplicate node ids")
        if not ids:
            raise FormatError("graph file must declare at least one node")
        order = sorted(range(len(ids)), key=lambda i: ids[i])
        object.__setattr__(self, "nodes", tuple(ids[i] for i in order))
        known = set(ids)

        interval = None
        canonical = []
        for edge in self.edges:
            if len(edge) == 3:
                u, v, p = edge
                vals = (_require_number(p, f"edge ({u}, {v}) probability"),)
                kind = False
            elif len(edge) == 4:
                u, v, lo, hi = edge
                vals = (
                    _require_number(lo, f"edge ({u}, {v}) lower bound"),
                    _require_number(hi, f"edge ({u}, {v}) upper bound"),
                )
                kind = True
            else:
                raise FormatError(f"edge record of length {len(edge)}")
            if interval is None:
                interval = kind
            elif interval is not kind:
                raise FormatError("file mixes point and interval edges")
            u = _require_int(u, "edge endpoint")
            v = _require_int(v, "edge endpoint")
            for endpoint in (u, v):
                if endpoint not in known:
                    raise FormatError(f"edge references unknown node {endpoint}")
            if u == v:
                raise FormatError(f"self loop on node {u}")
            if not self.directed and u > v:
                u, v = v, u
            canonical.append((u, v, *vals))
        canonical.sort(key=lambda e: (e[0], e[1]))
        for prev, cur in zip(canonical, canonical[1:]):
            if prev[:2] == cur[:2]:
                raise FormatError(f"duplicate edge ({cur[0]}, {cur[1]})")
        object.__setattr__(self, "edges", tuple(canonical))

        if self.sink not in known:
            raise FormatError(f"sink {self.sink} is not a declared node")
        if self.source is not None and self.source not in known:
            raise FormatError(f"source {self.source} is not a declared node")
        if self.positions is not None:
            if len(self.positions) != len(self.nodes):
                raise FormatError(
                    f"{len(self.positions)} positions for {len(self.nodes)} nodes"
                )
            checked = [
                (
                    _require_number(x, "node x coordinate"),
                    _require_number(y, "node y coordinate"),
                )
                for x, y in self.positions
            ]
            # Keep each pair attached to its node across the id sort above.
            object.__setattr__(
                self, "positions", tuple(checked[i] for i in order)
            )

    # -- label mapping ----------------------------------------------------

    @property
    def is_interval(self) -> bool:
        return bool(self.edges) and len(self.edges[0]) == 4

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    def index_of(self, label: int) -> int:
        """Dense index of a node id (ids are indexed in ascending order)."""
        try:
            return self._index[label]
        except KeyError:
            raise FormatError(f"unknown node id {label}") from None

    @cached_property
    def _index(self) -> dict[int, int]:
        return {label: i for i, label in enumerate(self.nodes)}

    @property
    def sink_index(self) -> int:
        return self.index_of(self.sink)

    @property
    def source_index(self) -> int | None:
        return None if self.source is None else self.index_of(self.source)

    # -- conversions to in-memory graphs ----------------------------------

    def _dense_edges(self) -> tuple[tuple, ...]:
        return tuple(
            (self.index_of(e[0]), self.index_of(e[1]), *e[2:]) for e in self.edges
        )

    def to_connectivity(self) -> ConnectivityGraph:
        if self.directed:
            raise FormatError("expected an undirected connectivity graph file")
        if self.is_interval:
            raise FormatError("interval edges are not supported on undirected graphs")
        return ConnectivityGraph(self.node_count, self._dense_edges(), self.positions)

    def to_dodag(self) -> Dodag:
        if not self.directed:
            raise FormatError("expected a directed graph file")
        if self.is_interval:
            raise FormatError(
                "file carries interval probabilities; use the interval reading"
            )
        return Dodag(self.node_count, self._dense_edges(), self.sink_index, self.source_index)

    def to_interval(self) -> IntervalGraph:
        if not self.directed:
            raise FormatError("expected a directed graph file")
        if not self.is_interval:
            raise FormatError("file carries point probabilities, not intervals")
        return IntervalGraph(
            self.node_count, self._dense_edges(), self.sink_index, self.source_index
        )


def _labels_for(node_count: int, labels: Sequence[int] | None) -> tuple[int, ...]:
    if labels is None:
        return tuple(range(node_count))
    labels = tuple(labels)
    if len(labels) != node_count:
        raise GraphError(f"{len(labels)} labels for {node_count} nodes")
    if sorted(labels) != list(labels):
        raise GraphError("node labels must be in ascending order")
    return labels


def from_connectivity(
    graph: ConnectivityGraph,
    sink: int,
    source: int | None = None,
    labels: Sequence[int] | None = None,
) -> GraphFile:
    """Wrap a connectivity graph (dense indices relabeled via ``labels``)."""
    lab = _labels_for(graph.node_count, labels)
    return GraphFile(
        directed=False,
        sink=lab[sink],
        nodes=lab,
        edges=tuple((lab[u], lab[v], p) for u, v, p in graph.edges),
        source=None if source is None else lab[source],
        positions=graph.positions,
    )


def from_dodag(
    graph: Dodag,
    labels: Sequence[int] | None = None,
    positions: Sequence[tuple[float, float]] | None = None,
) -> GraphFile:
    lab = _labels_for(graph.node_count, labels)
    return GraphFile(
        directed=True,
        sink=lab[graph.sink],
        nodes=lab,
        edges=tuple((lab[u], lab[v], p) for u, v, p in graph.edges),
        source=None if graph.source is None else lab[graph.source],
        positions=None if positions is None else tuple(positions),
    )


def from_interval(graph: IntervalGraph, labels: Sequence[int] | None = None) -> GraphFile:
    lab = _labels_for(graph.node_count, labels)
    return GraphFile(
        directed=True,
        sink=lab[graph.sink],
        nodes=lab,
        edges=tuple((lab[u], lab[v], lo, hi) for u, v, lo, hi in graph.edges),
        source=None if graph.source is None else lab[graph.source],
    )


# -- canonical JSON ---------------------------------------------------------


def _node_line(gf: GraphFile, i: int) -> str:
    parts = [f'"id": {gf.nodes[i]}']
    if gf.positions is not None:
        x, y = gf.positions[i]
        parts.append(f'"x": {format_float(x)}')
        parts.append(f'"y": {format_float(y)}')
    return "{" + ", ".join(parts) + "}"


def _edge_line(edge: tuple) -> str:
    if len(edge) == 3:
        u, v, p = edge
        parts = [f'"p": {format_float(p)}']
    else:
        u, v, lo, hi = edge
        parts = [f'"p_hi": {format_float(hi)}', f'"p_lo": {format_float(lo)}']
    parts.append(f'"u": {u}')
    parts.append(f'"v": {v}')
    return "{" + ", ".join(parts) + "}"


def _array(lines: list[str], indent: str) -> str:
    if not lines:
        return "[]"
    inner = ",\n".join(indent + "  " + line for line in lines)
    return "[\n" + inner + "\n" + indent + "]"


def dumps(gf: GraphFile) -> str:
    """Serialize to the canonical byte form (sorted keys, fixed floats)."""
    edges = _array([_edge_line(e) for e in gf.edges], "  ")
    nodes = _array([_node_line(gf, i) for i in range(gf.node_count)], "  ")
    source = "null" if gf.source is None else str(gf.source)
    return (
        "{\n"
        f'  "directed": {"true" if gf.directed else "false"},\n'
        f'  "edges": {edges},\n'
        f'  "nodes": {nodes},\n'
        f'  "sink": {gf.sink},\n'
        f'  "source": {source}\n'
        "}\n"
    )


def _reject_constant(token: str) -> float:
    raise FormatError(f"non-finite JSON constant {token!r} is not allowed")


def loads(text: str) -> GraphFile:
    """Parse a graph file from JSON text (strict about shape and keys)."""
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise FormatError("graph file must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise FormatError(f"unknown keys in graph file: {sorted(unknown)}")
    for key in ("directed", "sink", "nodes", "edges"):
        if key not in doc:
            raise FormatError(f"graph file is missing {key!r}")
    if not isinstance(doc["directed"], bool):
        raise FormatError("'directed' must be a boolean")
    if not isinstance(doc["nodes"], list) or not isinstance(doc["edges"], list):
        raise FormatError("'nodes' and 'edges' must be arrays")

    ids: list[int] = []
    positions: list[tuple[float, float]] = []
    with_pos = None
    for record in doc["nodes"]:
        if not isinstance(record, dict):
            raise FormatError("node records must be objects")
        unknown = set(record) - {"id", "x", "y"}
        if unknown:
            raise FormatError(f"unknown keys in node record: {sorted(unknown)}")
        if "id" not in record:
            raise FormatError("node record is missing 'id'")
        ids.append(_require_int(record["id"], "node id"))
        has_pos = "x" in record or "y" in record
        if has_pos and not ("x" in record and "y" in record):
            raise FormatError(f"node {record['id']} has only one coordinate")
        if with_pos is None:
            with_pos = has_pos
        elif with_pos is not has_pos:
            raise FormatError("either every node or no node may carry coordinates")
        if has_pos:
            positions.append(
                (
                    _require_number(record["x"], "node x coordinate"),
                    _require_number(record["y"], "node y coordinate"),
                )
            )

    pos_tuple = tuple(positions) if with_pos else None

    edges: list[tuple] = []
    for record in doc["edges"]:
        if not isinstance(record, dict):
            raise FormatError("edge records must be objects")
        keys = set(record)
        if keys == {"u", "v", "p"}:
            edges.append((record["u"], record["v"], record["p"]))
        elif keys == {"u", "v", "p_lo", "p_hi"}:
            edges.append((record["u"], record["v"], record["p_lo"], record["p_hi"]))
        else:
            raise FormatError(
                "edge records need keys {u, v, p} or {u, v, p_lo, p_hi}; "
                f"got {sorted(keys)}"
            )

    sink = _require_int(doc["sink"], "sink")
    source = doc.get("source")
    if source is not None:
        source = _require_int(source, "source")
    return GraphFile(
        directed=doc["directed"],
        sink=sink,
        nodes=tuple(ids),
        edges=tuple(edges),
        source=source,
        positions=pos_tuple,
    )


# -- filesystem -------------------------------------------------------------


def write_text(path: str | os.PathLike, text: str) -> None:
    """Write a file atomically (temp file in the same directory, then rename)."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    try:
        fd, tmp = tempfile.mkstemp(prefix=".meshrel-", dir=directory)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_text(path: str | os.PathLike) -> str:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read()
    except OSError as exc:
        raise IoError(f"cannot read {os.fspath(path)}: {exc}") from exc


def dump(gf: GraphFile, path: str | os.PathLike) -> None:
    write_text(path, dumps(gf))


def load(path: str | os.PathLike) -> GraphFile:
    return loads(read_text(path))


# -- CSV reports ------------------------------------------------------------

CSV_DIGITS = 12


def format_cell(value: object) -> str:
    """One CSV cell: '' for None, %.12g for floats, str otherwise."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return format_float(value, CSV_DIGITS)
    return str(value)


def format_csv(header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(cell) for cell in row])
    return buffer.getvalue()


def write_csv(
    path: str | os.PathLike, header: Sequence[str], rows: Iterable[Sequence[object]]
) -> None:
    write_text(path, format_csv(header, rows))
