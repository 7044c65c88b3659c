"""Random geometric generator and the parametric relay-ladder family."""

import math

import pytest

from meshrel import (
    Dodag,
    FormatError,
    GenerationError,
    GeoParams,
    GraphError,
    fpp_fast,
    ladder,
    random_geometric,
    urf_sink,
    validate_dodag,
)
from meshrel.netgen import CONNECTIVITY_ATTEMPT_CAP


class TestGeoParams:
    def test_defaults(self):
        params = GeoParams(seed=1)
        assert params.node_count == 40
        assert params.side == 10.0
        assert params.min_spacing == 0.5
        assert (params.r1, params.r2) == (2.0, 3.0)
        assert (params.p_lo, params.p_hi) == (0.7, 1.0)
        assert params.band_rule == "linear"

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"node_count": 1},
            {"side": 0.0},
            {"min_spacing": -0.1},
            {"r1": 0.0},
            {"r1": 3.0, "r2": 2.0},
            {"p_lo": 0.8, "p_hi": 0.7},
            {"p_hi": 1.5},
            {"band_rule": "quadratic"},
            {"seed": -1},
            {"seed": 1 << 64},
        ],
    )
    def test_invalid_parameters_rejected(self, kwargs):
        with pytest.raises(FormatError):
            GeoParams(**{"seed": 1, **kwargs})


class TestRandomGeometric:
    def test_deterministic_for_a_seed(self):
        a = random_geometric(GeoParams(seed=42))
        b = random_geometric(GeoParams(seed=42))
        assert a.edges == b.edges
        assert a.positions == b.positions

    def test_different_seeds_differ(self):
        a = random_geometric(GeoParams(seed=1))
        b = random_geometric(GeoParams(seed=2))
        assert a.positions != b.positions

    def test_geometry_invariants(self):
        params = GeoParams(seed=7)
        cg = random_geometric(params)
        assert cg.node_count == params.node_count
        assert cg.positions is not None
        assert len(cg.positions) == params.node_count
        for x, y in cg.positions:
            assert 0.0 <= x <= params.side
            assert 0.0 <= y <= params.side

        linked = {(u, v) for u, v, _ in cg.edges}
        for i in range(params.node_count):
            for j in range(i + 1, params.node_count):
                d = math.dist(cg.positions[i], cg.positions[j])
                assert d >= params.min_spacing
                if d < params.r1:
                    assert (i, j) in linked  # inside the certain radius
                if d > params.r2:
                    assert (i, j) not in linked  # beyond the outer radius

        for _, _, p in cg.edges:
            assert params.p_lo <= p <= params.p_hi

    def test_connected(self):
        for seed in (0, 1, 2, 3):
            assert random_geometric(GeoParams(seed=seed)).is_connected()

    def test_half_band_rule(self):
        cg = random_geometric(GeoParams(seed=3, band_rule="half"))
        assert cg.is_connected()

    def test_hard_disk_degenerate_band(self):
        params = GeoParams(seed=11, r1=2.5, r2=2.5)
        cg = random_geometric(params)
        linked = {(u, v) for u, v, _ in cg.edges}
        for i in range(params.node_count):
            for j in range(i + 1, params.node_count):
                d = math.dist(cg.positions[i], cg.positions[j])
                assert ((i, j) in linked) == (d < params.r1)

    def test_placement_infeasible(self):
        # Two nodes can never sit 2.0 apart inside a unit square.
        with pytest.raises(GenerationError, match="placement"):
            random_geometric(GeoParams(seed=1, node_count=2, side=1.0, min_spacing=2.0))

    def test_connectivity_retries_exhausted(self):
        # Radii far below the percolation threshold: forty nodes spread over
        # a 50 x 50 area are essentially isolated points.
        params = GeoParams(seed=1, side=50.0)
        with pytest.raises(GenerationError, match=str(CONNECTIVITY_ATTEMPT_CAP)):
            random_geometric(params)

    def test_probability_band_bounds_are_respected(self):
        cg = random_geometric(GeoParams(seed=13, p_lo=0.2, p_hi=0.4))
        for _, _, p in cg.edges:
            assert 0.2 <= p <= 0.4


class TestLadder:
    def test_single_cell_is_a_chain(self):
        g = ladder(1, 1, 0.7)
        assert g.node_count == 3
        assert g.edges == ((0, 1, 0.7), (1, 2, 0.7))
        assert g.source == 0 and g.sink == 2
        # One path of two links: every metric is p^2.
        assert math.isclose(fpp_fast(g, 0)[g.sink], 0.49, abs_tol=1e-15)
        assert math.isclose(urf_sink(g)[0], 0.49, abs_tol=1e-15)

    def test_interleaved_edge_count(self):
        width, length = 3, 5
        g = ladder(width, length, 0.8)
        assert g.node_count == width * length + 2
        assert len(g.edges) == width + width * width * (length - 1) + width
        assert validate_dodag(g, require_outgoing=True).ok

    def test_disjoint_edge_count(self):
        width, length = 3, 5
        g = ladder(width, length, 0.8, wiring="disjoint")
        assert len(g.edges) == width + width * (length - 1) + width
        assert validate_dodag(g, require_outgoing=True).ok

    def test_disjoint_is_parallel_chains(self):
        # Reliability of independent chains: 1 - (1 - p^(length+1))^width.
        width, length, p = 3, 4, 0.9
        g = ladder(width, length, p, wiring="disjoint")
        want = 1.0 - (1.0 - p ** (length + 1)) ** width
        assert math.isclose(fpp_fast(g, g.source)[g.sink], want, rel_tol=1e-12)

    def test_perfect_links_reach_everywhere(self):
        g = ladder(2, 2, 1.0)
        table = fpp_fast(g, g.source)
        assert all(table[v] == 1.0 for v in range(g.node_count))

    def test_bad_shape_rejected(self):
        with pytest.raises(GraphError, match="width"):
            ladder(0, 3, 0.5)
        with pytest.raises(GraphError, match="width"):
            ladder(3, 0, 0.5)

    def test_bad_wiring_rejected(self):
        with pytest.raises(GraphError, match="wiring"):
            ladder(2, 2, 0.5, wiring="braided")

    def test_isomorphic_families_at_width_one(self):
        assert ladder(1, 4, 0.6).edges == ladder(1, 4, 0.6, wiring="disjoint").edges
