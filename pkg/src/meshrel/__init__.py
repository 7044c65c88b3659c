"""meshrel: reliability metrics, builders, and simulation for mesh routing DAGs.

The pieces fit together like this: :mod:`meshrel.netgen` generates scenario
graphs, :mod:`meshrel.builders` turns an undirected connectivity graph into a
routing DODAG, :mod:`meshrel.fpp` / :mod:`meshrel.urf` score a DODAG
analytically under flooding / unicast-retry forwarding, and
:mod:`meshrel.simulate` checks those numbers by seeded Monte-Carlo trials.
:mod:`meshrel.graphio` reads and writes the canonical file formats and
:mod:`meshrel.cli` exposes everything as the ``meshrel`` command.
"""

from ._kernels import available_backends, backend_name
from .builders import (
    BuildResult,
    ThresholdSchedule,
    build_minhop,
    build_urf_dt,
    build_urf_gg,
    select_downstream,
)
from .errors import (
    CapError,
    CycleError,
    FormatError,
    GenerationError,
    GraphError,
    IoError,
    MeshrelError,
)
from .fpp import fpp_bounds, fpp_bruteforce, fpp_fast, fpp_to_sink
from .graph import (
    ConnectivityGraph,
    Dodag,
    IntervalGraph,
    MetricTable,
    hops_to_sink,
    reachable_from,
    topological_order,
    validate_dodag,
)
from .netgen import GeoParams, ladder, random_geometric
from .simulate import EstimateTable, TrialConfig, simulate
from .urf import (
    UrfBounds,
    rrurf_sink,
    urf_bounds,
    urf_sink,
    urf_source,
    urf_weight_table,
)

__version__ = "0.1.0"

__all__ = [
    "BuildResult",
    "CapError",
    "ConnectivityGraph",
    "CycleError",
    "Dodag",
    "EstimateTable",
    "FormatError",
    "GenerationError",
    "GeoParams",
    "GraphError",
    "IntervalGraph",
    "IoError",
    "MeshrelError",
    "MetricTable",
    "ThresholdSchedule",
    "TrialConfig",
    "UrfBounds",
    "available_backends",
    "backend_name",
    "build_minhop",
    "build_urf_dt",
    "build_urf_gg",
    "fpp_bounds",
    "fpp_bruteforce",
    "fpp_fast",
    "fpp_to_sink",
    "hops_to_sink",
    "ladder",
    "random_geometric",
    "reachable_from",
    "rrurf_sink",
    "select_downstream",
    "simulate",
    "topological_order",
    "urf_bounds",
    "urf_sink",
    "urf_source",
    "urf_weight_table",
    "validate_dodag",
    "__version__",
]
