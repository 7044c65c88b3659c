"""Command-line front end.

Subcommands: ``gen`` (scenario generators), ``build`` (topology builders),
``metric`` (analytic reliability tables), ``simulate`` (Monte-Carlo
estimates), ``experiment`` (batch comparison), ``validate`` (invariant
checks on a graph file).

Every failure is reported as one line on stderr, ``error: [<kind>]
<message>``, with process exit codes 0 (ok), 2 (validation/format), 3
(resource cap or generation retry budget), 4 (I/O).  All output files are
written atomically, and every command is deterministic given its flags.
"""

from __future__ import annotations

import functools
import sys

import click

from . import graphio
from .builders import (
    CROSS_LINK_MODES,
    SELECT_MODES,
    ThresholdSchedule,
    build_minhop,
    build_urf_dt,
    build_urf_gg,
)
from .errors import FormatError, GraphError, MeshrelError
from .experiment import ALGORITHMS, ExperimentConfig
from .experiment import run as run_experiment
from .experiment import summarize_rows_csv
from .fpp import SWEEP_CUT_CAP, fpp_bounds, fpp_fast
from .graph import validate_dodag
from .netgen import BAND_RULES, GeoParams, ladder, random_geometric
from .simulate import MODELS, TrialConfig, simulate
from .urf import rrurf_sink, urf_bounds, urf_sink
from ._kernels import available_backends

DEFAULT_THRESHOLDS = "1:-0.01:0"
DEFAULT_ROUNDS = 100


def _reporting_errors(fn):
    """Map toolkit errors onto the documented one-line stderr format."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except MeshrelError as exc:
            click.echo(f"error: [{exc.kind}] {exc}", err=True)
            sys.exit(exc.exit_code)

    return wrapper


def _emit(text: str, out: str | None) -> None:
    """Write to a file atomically, or to stdout when no path was given."""
    if out is None:
        click.echo(text, nl=False)
    else:
        graphio.write_text(out, text)


def _load(path: str) -> graphio.GraphFile:
    return graphio.load(path)


@click.group()
@click.version_option(package_name="meshrel")
def cli() -> None:
    """Mesh-routing reliability toolkit."""


# -- gen ---------------------------------------------------------------------


@cli.command()
@click.option("--kind", type=click.Choice(["geometric", "ladder"]), default="geometric",
              show_default=True, help="Scenario family.")
@click.option("--seed", type=int, default=None,
              help="Generator seed (required for geometric).")
@click.option("--n", "node_count", type=int, default=40, show_default=True,
              help="Node count (geometric).")
@click.option("--side", type=float, default=10.0, show_default=True,
              help="Square side length (geometric).")
@click.option("--spacing", type=float, default=0.5, show_default=True,
              help="Minimum node spacing (geometric).")
@click.option("--r1", type=float, default=2.0, show_default=True,
              help="Radius of certain connectivity (geometric).")
@click.option("--r2", type=float, default=3.0, show_default=True,
              help="Radius beyond which no link exists (geometric).")
@click.option("--p-lo", type=float, default=0.7, show_default=True,
              help="Lower end of the link-probability range (geometric).")
@click.option("--p-hi", type=float, default=1.0, show_default=True,
              help="Upper end of the link-probability range (geometric).")
@click.option("--band-rule", type=click.Choice(BAND_RULES), default="linear",
              show_default=True, help="Link-existence rule between r1 and r2.")
@click.option("--width", type=int, default=3, show_default=True,
              help="Relays per column (ladder).")
@click.option("--length", type=int, default=6, show_default=True,
              help="Number of columns (ladder).")
@click.option("--p", type=float, default=0.7, show_default=True,
              help="Uniform link probability (ladder).")
@click.option("--wiring", type=click.Choice(["interleaved", "disjoint"]),
              default="interleaved", show_default=True,
              help="Column coupling (ladder).")
@click.option("-o", "--out", required=True, type=click.Path(dir_okay=False),
              help="Output graph file.")
@_reporting_errors
def gen(kind, seed, node_count, side, spacing, r1, r2, p_lo, p_hi, band_rule,
        width, length, p, wiring, out) -> None:
    """Generate a scenario graph file (sink is node 0 / the last ladder node)."""
    if kind == "geometric":
        if seed is None:
            raise FormatError("gen --kind geometric requires --seed")
        params = GeoParams(
            seed=seed, node_count=node_count, side=side, min_spacing=spacing,
            r1=r1, r2=r2, p_lo=p_lo, p_hi=p_hi, band_rule=band_rule,
        )
        graph = random_geometric(params)
        gf = graphio.from_connectivity(graph, sink=0)
    else:
        gf = graphio.from_dodag(ladder(width, length, p, wiring=wiring))
    graphio.dump(gf, out)
    click.echo(
        f"{kind}: {gf.node_count} nodes, {len(gf.edges)} edges -> {out}", err=True
    )


# -- build -------------------------------------------------------------------


@cli.command()
@click.option("--algo", required=True, type=click.Choice(ALGORITHMS),
              help="Topology construction algorithm.")
@click.option("-i", "--in", "graph_path", required=True,
              type=click.Path(exists=False, dir_okay=False),
              help="Undirected connectivity graph file.")
@click.option("-o", "--out", required=True, type=click.Path(dir_okay=False),
              help="Output routing topology file.")
@click.option("--sink", type=int, default=None,
              help="Sink node id (defaults to the file's sink).")
@click.option("--thresholds", default=None,
              help="urf-dt schedule: 'start:step:end' or comma list "
                   f"[default: {DEFAULT_THRESHOLDS}].")
@click.option("--rounds", type=int, default=None,
              help=f"urf-dt round budget [default: {DEFAULT_ROUNDS}].")
@click.option("--select", type=click.Choice(SELECT_MODES), default=None,
              help="Downstream link-set selection mode [default: lex].")
@click.option("--cross-links", type=click.Choice(CROSS_LINK_MODES), default=None,
              help="urf-dt same-hop link pass: per round or once at the end "
                   "[default: round].")
@_reporting_errors
def build(algo, graph_path, out, sink, thresholds, rounds, select, cross_links) -> None:
    """Build a routing topology from a connectivity graph."""
    if algo != "urf-dt":
        for name, value in (("--thresholds", thresholds), ("--rounds", rounds),
                            ("--cross-links", cross_links)):
            if value is not None:
                raise FormatError(f"{name} only applies to --algo urf-dt")
    if algo == "minhop" and select is not None:
        raise FormatError("--select does not apply to --algo minhop")

    gf = _load(graph_path)
    graph = gf.to_connectivity()
    sink_index = gf.sink_index if sink is None else gf.index_of(sink)
    mode = select if select is not None else "lex"
    if algo == "urf-dt":
        schedule = ThresholdSchedule.parse(
            thresholds if thresholds is not None else DEFAULT_THRESHOLDS,
            rounds if rounds is not None else DEFAULT_ROUNDS,
        )
        result = build_urf_dt(
            graph, sink_index, schedule, mode=mode,
            cross_links=cross_links if cross_links is not None else "round",
        )
    elif algo == "urf-gg":
        result = build_urf_gg(graph, sink_index, mode=mode)
    else:
        result = build_minhop(graph, sink_index)
    out_gf = graphio.from_dodag(
        result.topology, labels=gf.nodes, positions=gf.positions
    )
    graphio.dump(out_gf, out)
    joined = result.topology.node_count - len(result.unjoined)
    max_hop = max(result.hop.values())
    click.echo(
        f"{algo}: joined {joined}/{result.topology.node_count} nodes, "
        f"{len(result.topology.edges)} links, max hop {max_hop} -> {out}",
        err=True,
    )


# -- metric ------------------------------------------------------------------


def _metric_csv(gf: graphio.GraphFile, kind: str, source: int | None,
                cut_cap: int, trace: bool) -> str:
    if kind == "bounds":
        if not gf.is_interval:
            raise FormatError(
                "--kind bounds needs an interval graph file (p_lo/p_hi edges)"
            )
        ig = gf.to_interval()
        bounds = urf_bounds(ig)
        source_index = gf.index_of(source) if source is not None else gf.source_index
        if source_index is not None:
            fpp_lo, fpp_hi = fpp_bounds(ig, source_index, cut_cap=cut_cap)
        else:
            fpp_lo = fpp_hi = None
        header = ["node", "urf_lo", "urf_hi", "oversum", "fpp_lo", "fpp_hi"]
        rows = [
            (
                gf.nodes[v],
                bounds.lo[v],
                bounds.hi[v],
                v in bounds.oversum_nodes,
                None if fpp_lo is None else fpp_lo[v],
                None if fpp_hi is None else fpp_hi[v],
            )
            for v in range(gf.node_count)
        ]
        return graphio.format_csv(header, rows)

    if gf.is_interval:
        raise FormatError(
            f"--kind {kind} needs point probabilities; "
            "use --kind bounds for interval files"
        )
    g = gf.to_dodag()
    if kind == "urf":
        table = urf_sink(g)
    elif kind == "rrurf":
        table = rrurf_sink(g)
    else:  # fpp
        source_index = gf.index_of(source) if source is not None else gf.source_index
        if source_index is None:
            raise FormatError("--kind fpp needs --source (file declares none)")
        on_step = _trace_printer(gf) if trace else None
        table = fpp_fast(g, source_index, cut_cap=cut_cap, on_step=on_step)
    rows = [(gf.nodes[v], table[v]) for v in range(gf.node_count)]
    return graphio.format_csv(["node", kind], rows)


def _trace_printer(gf: graphio.GraphFile):
    def on_step(step) -> None:
        cut = ",".join(str(gf.nodes[v]) for v in step.distribution.cut)
        retired = ",".join(str(gf.nodes[v]) for v in step.retired) or "-"
        click.echo(
            f"step {step.step}: picked {gf.nodes[step.picked]} "
            f"added {gf.nodes[step.added]} value {step.value:.12g} "
            f"retired {retired} cut [{cut}] mass {step.distribution.total:.12g}",
            err=True,
        )

    return on_step


@cli.command()
@click.option("--kind", required=True, type=click.Choice(["fpp", "urf", "rrurf", "bounds"]),
              help="Which reliability table to compute.")
@click.option("-i", "--in", "graph_path", required=True,
              type=click.Path(dir_okay=False), help="Routing topology file.")
@click.option("-o", "--out", type=click.Path(dir_okay=False), default=None,
              help="Output CSV (stdout when omitted).")
@click.option("--source", type=int, default=None,
              help="Source node id for flooding metrics.")
@click.option("--cut-cap", type=int, default=SWEEP_CUT_CAP, show_default=True,
              help="Abort if the sweep cut outgrows this size.")
@click.option("--trace", is_flag=True,
              help="Print one line per sweep step to stderr (fpp only).")
@_reporting_errors
def metric(kind, graph_path, out, source, cut_cap, trace) -> None:
    """Compute an analytic per-node reliability table as CSV."""
    if trace and kind != "fpp":
        raise FormatError("--trace only applies to --kind fpp")
    gf = _load(graph_path)
    _emit(_metric_csv(gf, kind, source, cut_cap, trace), out)


# -- simulate ----------------------------------------------------------------


@cli.command("simulate")
@click.option("--model", required=True, type=click.Choice(MODELS),
              help="Forwarding model to simulate.")
@click.option("--trials", required=True, type=int, help="Number of trials.")
@click.option("--seed", required=True, type=int, help="RNG seed.")
@click.option("-i", "--in", "graph_path", required=True,
              type=click.Path(dir_okay=False), help="Routing topology file.")
@click.option("-o", "--out", type=click.Path(dir_okay=False), default=None,
              help="Output CSV (stdout when omitted).")
@click.option("--source", type=int, default=None,
              help="Source node id (defaults to the file's source).")
@click.option("--backend", type=click.Choice(["auto", "python", "cython"]),
              default="auto", show_default=True,
              help="Trial kernel implementation.")
@_reporting_errors
def simulate_cmd(model, trials, seed, graph_path, out, source, backend) -> None:
    """Estimate per-node reach probabilities by Monte-Carlo trials."""
    if backend not in available_backends():
        raise FormatError(
            f"backend {backend!r} is not available in this installation"
        )
    gf = _load(graph_path)
    g = gf.to_dodag()
    cfg = TrialConfig(
        model=model, trials=trials, seed=seed,
        source=None if source is None else gf.index_of(source),
    )
    table = simulate(g, cfg, backend=backend)
    rows = [
        (gf.nodes[v], table.hits[v], table.estimate(v), table.stderr(v))
        for v in range(gf.node_count)
    ]
    _emit(graphio.format_csv(["node", "hits", "estimate", "stderr"], rows), out)


# -- experiment --------------------------------------------------------------


@cli.command()
@click.option("--runs", required=True, type=int, help="Number of scenario seeds.")
@click.option("--seed", required=True, type=int, help="Base seed (run i uses seed+i).")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False),
              help="Output directory for rows.csv and summary.csv.")
@click.option("--n", "node_count", type=int, default=40, show_default=True)
@click.option("--side", type=float, default=10.0, show_default=True)
@click.option("--spacing", type=float, default=0.5, show_default=True)
@click.option("--r1", type=float, default=2.0, show_default=True)
@click.option("--r2", type=float, default=3.0, show_default=True)
@click.option("--p-lo", type=float, default=0.7, show_default=True)
@click.option("--p-hi", type=float, default=1.0, show_default=True)
@click.option("--thresholds", default=DEFAULT_THRESHOLDS, show_default=True,
              help="urf-dt schedule.")
@click.option("--rounds", type=int, default=DEFAULT_ROUNDS, show_default=True,
              help="urf-dt round budget.")
@click.option("--select", type=click.Choice(SELECT_MODES), default="lex",
              show_default=True, help="Downstream selection mode.")
@click.option("--with-fpp", is_flag=True,
              help="Also compute the flooding column (can hit the cut cap).")
@click.option("--threads", type=int, default=None,
              help="Worker processes (default: MESHREL_THREADS, 0 = auto).")
@_reporting_errors
def experiment(runs, seed, out_dir, node_count, side, spacing, r1, r2, p_lo, p_hi,
               thresholds, rounds, select, with_fpp, threads) -> None:
    """Run the batch builder comparison and write row + summary CSVs."""
    config = ExperimentConfig(
        runs=runs, seed=seed, node_count=node_count, side=side,
        min_spacing=spacing, r1=r1, r2=r2, p_lo=p_lo, p_hi=p_hi,
        thresholds=thresholds, rounds=rounds, select=select, with_fpp=with_fpp,
    )
    result = run_experiment(config, threads=threads)
    rows_path, summary_path = result.write(out_dir)
    if summarize_rows_csv(graphio.read_text(rows_path)) != result.summary_csv:
        raise GraphError("summary does not match recomputation from rows.csv")
    click.echo(f"wrote {rows_path} and {summary_path}", err=True)
    click.echo(result.summary_csv, nl=False)


# -- validate ----------------------------------------------------------------


@cli.command()
@click.option("-i", "--in", "graph_path", required=True,
              type=click.Path(dir_okay=False), help="Graph file to check.")
@click.option("--require-outgoing", is_flag=True,
              help="Also flag non-sink nodes without outgoing links.")
@_reporting_errors
def validate(graph_path, require_outgoing) -> None:
    """Check the structural invariants of a graph file."""
    gf = _load(graph_path)
    if not gf.directed:
        graph = gf.to_connectivity()
        component = graph.component(gf.sink_index)
        if len(component) != graph.node_count:
            missing = sorted(
                gf.nodes[v] for v in range(graph.node_count) if v not in component
            )
            click.echo(
                f"violation: disconnected nodes (cannot reach sink): {missing}"
            )
            sys.exit(2)
        click.echo(f"ok: connected, {graph.node_count} nodes, {len(graph.edges)} links")
        return
    g = gf.to_interval().at_hi() if gf.is_interval else gf.to_dodag()
    report = validate_dodag(g, require_outgoing=require_outgoing)
    if report.ok:
        click.echo(f"ok: valid DODAG, {g.node_count} nodes, {len(g.edges)} links")
        return
    for violation in report.violations:
        labels = ",".join(str(gf.nodes[v]) for v in violation.nodes)
        click.echo(f"violation: [{violation.kind}] {violation.message} (nodes {labels})")
    sys.exit(2)


def main() -> None:
    cli(prog_name="meshrel")


if __name__ == "__main__":
    main()
