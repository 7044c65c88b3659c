"""Monte-Carlo forwarding trials against the analytic tables."""

import math
import random

import pytest

from meshrel import (
    Dodag,
    GraphError,
    TrialConfig,
    fpp_fast,
    rrurf_sink,
    simulate,
    urf_sink,
    urf_source,
)
from helpers import chain, diamond, random_dodag


def assert_within_sigma(estimate_table, node, want, sigma=4.0):
    got = estimate_table.estimate(node)
    err = estimate_table.stderr(node)
    if err == 0.0:
        assert math.isclose(got, want, abs_tol=1e-12)
    else:
        assert abs(got - want) <= sigma * err, (
            f"node {node}: estimate {got} vs analytic {want} "
            f"({abs(got - want) / err:.2f} sigma)"
        )


class TestConfig:
    def test_unknown_model_rejected(self):
        with pytest.raises(GraphError, match="model"):
            TrialConfig(model="teleport", trials=10, seed=1)

    def test_trials_must_be_positive(self):
        with pytest.raises(GraphError, match="trials"):
            TrialConfig(model="flood", trials=0, seed=1)

    def test_seed_must_fit_64_bits(self):
        with pytest.raises(GraphError, match="seed"):
            TrialConfig(model="flood", trials=1, seed=-1)
        with pytest.raises(GraphError, match="seed"):
            TrialConfig(model="flood", trials=1, seed=1 << 64)
        TrialConfig(model="flood", trials=1, seed=(1 << 64) - 1)

    def test_source_resolution(self):
        g = Dodag(2, ((1, 0, 0.5),), sink=0)  # no declared source
        with pytest.raises(GraphError, match="source"):
            simulate(g, TrialConfig(model="flood", trials=10, seed=1))
        table = simulate(
            g, TrialConfig(model="flood", trials=10, seed=1, source=1)
        )
        assert table.hits[1] == 10


class TestDeterminism:
    def test_same_seed_same_counts(self):
        g = diamond(0.7)
        for model in ("flood", "urf", "rr"):
            cfg = TrialConfig(model=model, trials=5000, seed=77)
            assert simulate(g, cfg).hits == simulate(g, cfg).hits

    def test_different_seeds_differ(self):
        g = diamond(0.7)
        a = simulate(g, TrialConfig(model="flood", trials=5000, seed=1))
        b = simulate(g, TrialConfig(model="flood", trials=5000, seed=2))
        assert a.hits != b.hits

    def test_trial_count_prefix_property(self):
        # Counter-based substreams: the first n trials of a longer run are
        # the same trials, so counts grow monotonically with the trial count.
        g = diamond(0.7)
        small = simulate(g, TrialConfig(model="urf", trials=1000, seed=5))
        large = simulate(g, TrialConfig(model="urf", trials=2000, seed=5))
        for v in range(g.node_count):
            assert small.hits[v] <= large.hits[v]


class TestAgreement:
    def test_flood_matches_analytic_on_diamond(self):
        g = diamond(0.7)
        table = simulate(g, TrialConfig(model="flood", trials=40_000, seed=11))
        analytic = fpp_fast(g, 3)
        for v in range(g.node_count):
            assert_within_sigma(table, v, analytic[v])

    def test_urf_matches_analytic_on_diamond(self):
        g = diamond(0.7)
        table = simulate(g, TrialConfig(model="urf", trials=40_000, seed=12))
        analytic = urf_source(g, 3)
        for v in range(g.node_count):
            assert_within_sigma(table, v, analytic[v])

    def test_rr_matches_analytic_at_sink(self):
        g = diamond(0.7)
        table = simulate(g, TrialConfig(model="rr", trials=40_000, seed=13))
        analytic = rrurf_sink(g)
        assert_within_sigma(table, 0, analytic[3])

    def test_urf_sink_estimate_on_random_graph(self):
        g = random_dodag(random.Random(71), max_nodes=7, max_edges=11)
        table = simulate(
            g, TrialConfig(model="urf", trials=40_000, seed=14, source=g.source)
        )
        analytic = urf_sink(g)
        assert_within_sigma(table, g.sink, analytic[g.source])

    def test_chain_deterministic_arithmetic(self):
        g = chain([1.0, 1.0, 1.0])
        for model in ("flood", "urf", "rr"):
            table = simulate(g, TrialConfig(model=model, trials=100, seed=3))
            assert all(table.hits[v] == 100 for v in range(g.node_count))
            assert table.estimate(0) == 1.0
            assert table.stderr(0) == 0.0

    def test_zero_probability_links_never_deliver(self):
        g = chain([0.0])
        for model in ("flood", "urf", "rr"):
            table = simulate(g, TrialConfig(model=model, trials=200, seed=4))
            assert table.hits[0] == 0
            assert table.hits[1] == 200


class TestEstimateTable:
    def test_estimate_and_stderr(self):
        g = diamond(0.7)
        table = simulate(g, TrialConfig(model="flood", trials=1000, seed=21))
        p = table.estimate(0)
        assert table.hits[0] == round(p * 1000)
        assert math.isclose(
            table.stderr(0), math.sqrt(p * (1 - p) / 1000), rel_tol=1e-12
        )
        assert table.model == "flood"
        assert table.trials == 1000
        assert table.seed == 21
