"""Exception types shared across the toolkit.

Every error carries an ``exit_code`` so the CLI can map failures onto its
documented process exit codes (2 validation, 3 resource cap, 4 I/O).
"""

from __future__ import annotations


class MeshrelError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 2
    kind = "validation"


class GraphError(MeshrelError):
    """Structurally invalid graph or inconsistent construction input."""


class CycleError(GraphError):
    """An operation required a DAG but the edge set contains a cycle."""

    def __init__(self, cycle: tuple[int, ...] | list[int]):
        self.cycle = tuple(cycle)
        path = " -> ".join(str(v) for v in self.cycle)
        super().__init__(f"cycle detected: {path}")


class FormatError(MeshrelError):
    """Malformed input file or unparseable option value."""

    kind = "format"


class CapError(MeshrelError):
    """A configurable resource cap was exceeded."""

    exit_code = 3
    kind = "cap"

    def __init__(self, message: str, *, cap: int, observed: int):
        self.cap = cap
        self.observed = observed
        super().__init__(message)


class GenerationError(MeshrelError):
    """Random generation exhausted its retry budget."""

    exit_code = 3
    kind = "cap"


class IoError(MeshrelError):
    """Filesystem read or write failed."""

    exit_code = 4
    kind = "io"
