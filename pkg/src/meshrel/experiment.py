"""Batch comparison harness: many random scenarios, three builders each.

For every run a fresh geometric connectivity graph is generated from a
derived seed (``base seed + run index``), each builder constructs a topology
on it, and one CSV row per node records the per-node metrics.  The summary
CSV aggregates the rows per algorithm.

Two conventions keep the numbers honest and reproducible:

* The summary is computed *from the serialized row text*, not from in-memory
  doubles, so recomputing the aggregates from ``rows.csv`` reproduces
  ``summary.csv`` byte for byte.
* Sink rows (hop 0) are excluded from the aggregates — the sink scores a
  constant 1 under every algorithm and would only dilute the comparison.
  Spread statistics use the sample variance.

Runs may execute in parallel worker processes (``MESHREL_THREADS``, 0 = one
per CPU); rows are emitted in seed order regardless of scheduling.
"""

from __future__ import annotations

import csv
import io
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

from .builders import (
    BuildResult,
    SELECT_MODES,
    ThresholdSchedule,
    build_minhop,
    build_urf_dt,
    build_urf_gg,
)
from .errors import FormatError
from .fpp import fpp_to_sink
from .graph import ConnectivityGraph
from .graphio import format_csv, write_text
from .netgen import GeoParams, random_geometric
from .urf import rrurf_sink

ALGORITHMS = ("minhop", "urf-dt", "urf-gg")

ROW_HEADER = ("seed", "algorithm", "node", "urf", "rrurf", "fpp", "hop", "max_hop")
SUMMARY_HEADER = (
    "algorithm",
    "urf_mean",
    "urf_median",
    "urf_variance",
    "max_hop_mean",
    "max_hop_median",
)

ROWS_FILENAME = "rows.csv"
SUMMARY_FILENAME = "summary.csv"


@dataclass(frozen=True)
class ExperimentConfig:
    """Scenario parameters for one batch (defaults match the 40-node study)."""

    runs: int
    seed: int
    node_count: int = 40
    side: float = 10.0
    min_spacing: float = 0.5
    r1: float = 2.0
    r2: float = 3.0
    p_lo: float = 0.7
    p_hi: float = 1.0
    thresholds: str = "1:-0.01:0"
    rounds: int = 100
    select: str = "lex"
    with_fpp: bool = False

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise FormatError(f"runs must be >= 1, got {self.runs}")
        if self.select not in SELECT_MODES:
            raise FormatError(
                f"unknown selection mode {self.select!r}; choose from {SELECT_MODES}"
            )
        # Fail fast on bad scenario or schedule parameters.
        self.geo_params(self.seed)
        self.schedule()

    def geo_params(self, seed: int) -> GeoParams:
        return GeoParams(
            seed=seed,
            node_count=self.node_count,
            side=self.side,
            min_spacing=self.min_spacing,
            r1=self.r1,
            r2=self.r2,
            p_lo=self.p_lo,
            p_hi=self.p_hi,
        )

    def schedule(self) -> ThresholdSchedule:
        return ThresholdSchedule.parse(self.thresholds, self.rounds)

    def run_seeds(self) -> tuple[int, ...]:
        return tuple((self.seed + i) % (1 << 64) for i in range(self.runs))


def build_topology(
    graph: ConnectivityGraph,
    algorithm: str,
    sink: int,
    schedule: ThresholdSchedule,
    select: str,
) -> BuildResult:
    if algorithm == "minhop":
        return build_minhop(graph, sink)
    if algorithm == "urf-dt":
        return build_urf_dt(graph, sink, schedule, mode=select)
    if algorithm == "urf-gg":
        return build_urf_gg(graph, sink, mode=select)
    raise FormatError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")


def run_seed(config: ExperimentConfig, seed: int) -> list[tuple]:
    """All rows for one scenario seed, in (algorithm, node) order."""
    graph = random_geometric(config.geo_params(seed))
    schedule = config.schedule()
    sink = 0
    rows: list[tuple] = []
    for algorithm in ALGORITHMS:
        result = build_topology(graph, algorithm, sink, schedule, config.select)
        rr = rrurf_sink(result.topology)
        fpp = fpp_to_sink(result.topology) if config.with_fpp else None
        max_hop = max(result.hop.values())
        for node in range(graph.node_count):
            rows.append(
                (
                    seed,
                    algorithm,
                    node,
                    result.reliability[node],
                    rr[node],
                    None if fpp is None else fpp[node],
                    result.hop.get(node),
                    max_hop,
                )
            )
    return rows


def resolve_threads(explicit: int | None = None) -> int:
    """Worker-process count: explicit arg, else MESHREL_THREADS, 0 = auto."""
    if explicit is None:
        raw = os.environ.get("MESHREL_THREADS", "0")
        try:
            explicit = int(raw)
        except ValueError:
            raise FormatError(f"MESHREL_THREADS must be an integer, got {raw!r}") from None
    if explicit < 0:
        raise FormatError(f"thread count must be >= 0, got {explicit}")
    if explicit == 0:
        return os.cpu_count() or 1
    return explicit


def _cell_float(text: str, where: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise FormatError(f"{where}: expected a number, got {text!r}") from None


def summarize_rows_csv(rows_csv: str) -> str:
    """Aggregate a serialized row table into the summary CSV text.

    This is the single source of truth for the aggregates: the harness calls
    it on the text it just wrote, and anyone can call it on ``rows.csv`` later
    and diff the result against ``summary.csv``.
    """
    reader = csv.reader(io.StringIO(rows_csv))
    header = next(reader, None)
    if header != list(ROW_HEADER):
        raise FormatError(f"unexpected row header {header!r}")
    urf: dict[str, list[float]] = {}
    max_hop: dict[str, dict[str, int]] = {}
    for line_no, row in enumerate(reader, start=2):
        if len(row) != len(ROW_HEADER):
            raise FormatError(f"row {line_no}: expected {len(ROW_HEADER)} cells")
        seed, algorithm, _node, urf_text, _rr, _fpp, hop, max_hop_text = row
        if hop == "0":  # the sink scores a constant 1; keep it out of the stats
            continue
        urf.setdefault(algorithm, []).append(
            _cell_float(urf_text, f"row {line_no} urf")
        )
        per_seed = max_hop.setdefault(algorithm, {})
        if max_hop_text:
            per_seed[seed] = int(_cell_float(max_hop_text, f"row {line_no} max_hop"))
    if not urf:
        raise FormatError("row table has no non-sink rows")

    summary_rows = []
    for algorithm in sorted(urf):
        values = urf[algorithm]
        hops = [max_hop[algorithm][seed] for seed in max_hop[algorithm]]
        summary_rows.append(
            (
                algorithm,
                statistics.fmean(values),
                float(statistics.median(values)),
                statistics.variance(values) if len(values) > 1 else 0.0,
                statistics.fmean(hops),
                float(statistics.median(hops)),
            )
        )
    return format_csv(SUMMARY_HEADER, summary_rows)


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    rows: tuple[tuple, ...]
    rows_csv: str
    summary_csv: str

    def write(self, out_dir: str | os.PathLike) -> tuple[str, str]:
        """Write rows.csv and summary.csv under ``out_dir``; returns the paths."""
        out_dir = os.fspath(out_dir)
        os.makedirs(out_dir, exist_ok=True)
        rows_path = os.path.join(out_dir, ROWS_FILENAME)
        summary_path = os.path.join(out_dir, SUMMARY_FILENAME)
        write_text(rows_path, self.rows_csv)
        write_text(summary_path, self.summary_csv)
        return rows_path, summary_path


def run(config: ExperimentConfig, *, threads: int | None = None) -> ExperimentResult:
    """Run the full batch; row order is by seed regardless of parallelism."""
    seeds = config.run_seeds()
    workers = min(resolve_threads(threads), len(seeds))
    worker = partial(run_seed, config)
    if workers <= 1 or len(seeds) == 1:
        per_seed = [worker(seed) for seed in seeds]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_seed = list(pool.map(worker, seeds))
    rows = tuple(row for chunk in per_seed for row in chunk)
    rows_csv = format_csv(ROW_HEADER, rows)
    summary_csv = summarize_rows_csv(rows_csv)
    return ExperimentResult(
        config=config, rows=rows, rows_csv=rows_csv, summary_csv=summary_csv
    )
