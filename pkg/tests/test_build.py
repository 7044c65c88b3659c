"""Topology builders: link selection, layering, greedy and threshold joining."""

import math
import random

import pytest

from meshrel import (
    CapError,
    ConnectivityGraph,
    FormatError,
    GeoParams,
    GraphError,
    ThresholdSchedule,
    build_minhop,
    build_urf_dt,
    build_urf_gg,
    random_geometric,
    select_downstream,
    urf_sink,
    validate_dodag,
)


def bfs_levels(cg: ConnectivityGraph, sink: int) -> dict[int, int]:
    from collections import deque

    level = {sink: 0}
    queue = deque([sink])
    while queue:
        u = queue.popleft()
        for v, _ in cg.neighbors(u):
            if v not in level:
                level[v] = level[u] + 1
                queue.append(v)
    return level


def assert_valid_build(cg, result):
    report = validate_dodag(result.topology)
    assert report.ok, report.violations
    assert set(result.hop) | set(result.unjoined) == set(range(cg.node_count))
    assert not (set(result.hop) & result.unjoined)
    for u, v, _ in result.topology.edges:
        assert u in result.hop and v in result.hop
        assert result.hop[u] >= result.hop[v]
    for value in result.reliability.values():
        assert 0.0 <= value <= 1.0
    recomputed = urf_sink(result.topology)
    for v in range(cg.node_count):
        assert math.isclose(result.reliability[v], recomputed[v], abs_tol=1e-15)


class TestThresholdSchedule:
    def test_parse_sweep(self):
        sched = ThresholdSchedule.parse("1:-0.01:0")
        assert len(sched.tau) == 101
        assert sched.tau[0] == 1.0
        assert sched.tau[1] == 0.99
        assert sched.tau[-1] == 0.0
        assert sched.rounds == 100

    def test_parse_comma_list(self):
        sched = ThresholdSchedule.parse("0.9,0.5,0.1", rounds=7)
        assert sched.tau == (0.9, 0.5, 0.1)
        assert sched.rounds == 7

    def test_threshold_lookup(self):
        sched = ThresholdSchedule((0.9, 0.5, 0.1))
        assert sched.threshold(0) is None
        assert sched.threshold(1) == 0.9
        assert sched.threshold(3) == 0.1
        assert sched.threshold(99) == 0.1  # tail persists

    @pytest.mark.parametrize(
        "text",
        ["", "abc", "1:0.1:0", "1:-0.1:2", "0.5:-0.1", "0.1,0.5", "1,2"],
    )
    def test_invalid_schedules_rejected(self, text):
        with pytest.raises(FormatError):
            ThresholdSchedule.parse(text)

    def test_increasing_tuple_rejected(self):
        with pytest.raises(FormatError, match="non-increasing"):
            ThresholdSchedule((0.5, 0.9))

    def test_rounds_must_be_positive(self):
        with pytest.raises(FormatError, match="rounds"):
            ThresholdSchedule((0.5,), rounds=0)


class TestSelectDownstream:
    def test_single_candidate(self):
        assert select_downstream([(4, 1.0, 0.9)]) == ((4,), 0.9)

    def test_two_useful_candidates_are_both_kept(self):
        # Direct 0.5 link to a perfect node plus a 0.9 link to a 0.9 node:
        # together they score 0.275*1 + 0.675*0.9 = 0.8825.
        candidates = [(0, 1.0, 0.5), (1, 0.9, 0.9)]
        for mode in ("lex", "exact"):
            ids, value = select_downstream(candidates, mode)
            assert ids == (0, 1)
            assert math.isclose(value, 0.8825, abs_tol=1e-15)

    def test_harmful_candidate_is_excluded(self):
        # Splitting traffic toward a nearly-dead node would halve the metric.
        candidates = [(1, 1.0, 0.9), (2, 0.01, 0.9)]
        for mode in ("lex", "exact"):
            ids, value = select_downstream(candidates, mode)
            assert ids == (1,)
            assert math.isclose(value, 0.9, abs_tol=1e-15)

    def test_never_returns_empty_set(self):
        ids, value = select_downstream([(3, 0.0, 0.5)])
        assert ids == (3,)
        assert value == 0.0

    def test_exact_tie_prefers_fewer_then_smaller_ids(self):
        # All-perfect candidates: every subset scores 1, so the tie rule
        # picks the singleton with the smallest id.
        candidates = [(5, 1.0, 1.0), (2, 1.0, 1.0), (9, 1.0, 1.0)]
        ids, value = select_downstream(candidates, "exact")
        assert ids == (2,)
        assert value == 1.0

    def test_lex_never_beats_exact(self):
        rng = random.Random(83)
        for _ in range(200):
            k = rng.randint(1, 8)
            candidates = [
                (i, rng.random(), rng.uniform(0.05, 1.0)) for i in range(k)
            ]
            _, lex_value = select_downstream(candidates, "lex")
            _, exact_value = select_downstream(candidates, "exact")
            assert lex_value <= exact_value + 1e-12

    def test_exact_candidate_cap(self):
        candidates = [(i, 0.5, 0.5) for i in range(16)]
        with pytest.raises(CapError) as exc:
            select_downstream(candidates, "exact")
        assert exc.value.cap == 15
        assert exc.value.observed == 16
        assert "lex" in str(exc.value)
        select_downstream(candidates, "lex")  # lex has no cap

    def test_empty_candidates_rejected(self):
        with pytest.raises(GraphError, match="candidates"):
            select_downstream([])

    def test_unknown_mode_rejected(self):
        with pytest.raises(GraphError, match="mode"):
            select_downstream([(0, 1.0, 0.5)], "greedy")


class TestMinHop:
    def test_diamond_layering(self):
        cg = ConnectivityGraph(
            4, ((0, 1, 0.7), (0, 2, 0.7), (1, 3, 0.7), (2, 3, 0.7))
        )
        result = build_minhop(cg, 0)
        assert result.hop == {0: 0, 1: 1, 2: 1, 3: 2}
        assert result.topology.edges == (
            (1, 0, 0.7),
            (2, 0, 0.7),
            (3, 1, 0.7),
            (3, 2, 0.7),
        )
        assert result.unjoined == frozenset()
        assert_valid_build(cg, result)

    def test_equal_hop_edge_points_toward_better_down_link(self):
        cg = ConnectivityGraph(3, ((0, 1, 0.9), (0, 2, 0.5), (1, 2, 0.8)))
        result = build_minhop(cg, 0)
        # Node 1 has the better link into the level below, so 2 -> 1.
        assert (2, 1, 0.8) in result.topology.edges
        assert_valid_build(cg, result)

    def test_equal_hop_tie_drops_the_edge(self):
        cg = ConnectivityGraph(3, ((0, 1, 0.7), (0, 2, 0.7), (1, 2, 0.8)))
        result = build_minhop(cg, 0)
        assert result.topology.edges == ((1, 0, 0.7), (2, 0, 0.7))

    def test_hops_are_bfs_levels(self):
        cg = random_geometric(GeoParams(seed=5))
        result = build_minhop(cg, 0)
        assert result.hop == bfs_levels(cg, 0)
        assert_valid_build(cg, result)

    def test_disconnected_nodes_stay_unjoined(self):
        cg = ConnectivityGraph(4, ((0, 1, 0.9), (2, 3, 0.9)))
        result = build_minhop(cg, 0)
        assert result.unjoined == frozenset({2, 3})
        assert result.topology.edges == ((1, 0, 0.9),)

    def test_bad_sink_rejected(self):
        with pytest.raises(GraphError, match="sink"):
            build_minhop(ConnectivityGraph(2, ((0, 1, 0.5),)), 7)


class TestGreedyGlobal:
    def test_star_joins_in_descending_link_order(self):
        cg = ConnectivityGraph(4, ((0, 1, 0.9), (0, 2, 0.5), (0, 3, 0.7)))
        result = build_urf_gg(cg, 0)
        assert result.join_round == {1: 1, 3: 2, 2: 3}
        assert result.hop == {0: 0, 1: 1, 2: 1, 3: 1}

    def test_diamond_join_order_follows_reliability(self):
        # After node 1 joins (0.9), node 3 behind it offers 0.81 which beats
        # node 2's direct 0.5 link, so the far node joins second and node 2
        # last picks up both downstream links.
        cg = ConnectivityGraph(
            4, ((0, 1, 0.9), (0, 2, 0.5), (1, 3, 0.9), (2, 3, 0.5))
        )
        result = build_urf_gg(cg, 0)
        assert result.join_round == {1: 1, 3: 2, 2: 3}
        assert result.hop == {0: 0, 1: 1, 3: 2, 2: 3}
        assert result.topology.edges == (
            (1, 0, 0.9),
            (2, 0, 0.5),
            (2, 3, 0.5),
            (3, 1, 0.9),
        )
        assert math.isclose(result.reliability[2], 0.67875, abs_tol=1e-15)
        assert_valid_build(cg, result)

    def test_join_value_is_recomputed_reliability(self):
        cg = random_geometric(GeoParams(seed=9))
        result = build_urf_gg(cg, 0)
        assert result.unjoined == frozenset()
        assert_valid_build(cg, result)

    def test_exact_mode_on_small_graph(self):
        cg = ConnectivityGraph(
            4, ((0, 1, 0.9), (0, 2, 0.5), (1, 3, 0.9), (2, 3, 0.5))
        )
        lex = build_urf_gg(cg, 0, mode="lex")
        exact = build_urf_gg(cg, 0, mode="exact")
        for v in range(4):
            assert exact.reliability[v] >= lex.reliability[v] - 1e-12

    def test_tie_breaks_toward_lower_id(self):
        cg = ConnectivityGraph(3, ((0, 1, 0.8), (0, 2, 0.8)))
        result = build_urf_gg(cg, 0)
        assert result.join_round == {1: 1, 2: 2}


class TestDecreasingThreshold:
    SCHED = ThresholdSchedule((0.95, 0.85, 0.55, 0.3))

    def line_graph(self):
        return ConnectivityGraph(3, ((0, 1, 0.9), (0, 2, 0.5), (1, 2, 0.9)))

    def test_line_join_trace(self):
        # Round 1: 0.9 misses tau[0]=0.95.  Round 2 (age 2): 0.9 clears 0.85.
        # Round 3: node 2's two-hop option (0.8825, age 2) clears 0.85 while
        # its one-hop option (0.5, age 3) still misses 0.55.
        result = build_urf_dt(self.line_graph(), 0, self.SCHED)
        assert result.join_round == {1: 2, 2: 3}
        assert result.hop == {0: 0, 1: 1, 2: 2}
        assert result.topology.edges == ((1, 0, 0.9), (2, 0, 0.5), (2, 1, 0.9))
        assert math.isclose(result.reliability[2], 0.8825, abs_tol=1e-15)

    def test_round_budget_can_leave_nodes_unjoined(self):
        sched = ThresholdSchedule((0.95, 0.85, 0.55, 0.3), rounds=2)
        result = build_urf_dt(self.line_graph(), 0, sched)
        assert result.join_round == {1: 2}
        assert result.unjoined == frozenset({2})
        assert result.reliability[2] == 0.0

    def test_zero_threshold_degenerates_to_bfs(self):
        sched = ThresholdSchedule((0.0,))
        for seed in (1, 2, 3):
            cg = random_geometric(GeoParams(seed=seed))
            result = build_urf_dt(cg, 0, sched)
            assert result.unjoined == frozenset()
            assert result.hop == bfs_levels(cg, 0)
            assert_valid_build(cg, result)

    def test_cross_link_points_toward_more_reliable_peer(self):
        cg = ConnectivityGraph(3, ((0, 1, 0.9), (0, 2, 0.8), (1, 2, 0.7)))
        result = build_urf_dt(cg, 0, ThresholdSchedule((0.0,)))
        assert result.join_round == {1: 1, 2: 1}
        assert result.hop == {0: 0, 1: 1, 2: 1}
        assert (2, 1, 0.7) in result.topology.edges
        assert math.isclose(result.reliability[2], 0.898, abs_tol=1e-15)

    def test_equal_peers_get_no_cross_link(self):
        cg = ConnectivityGraph(3, ((0, 1, 0.9), (0, 2, 0.9), (1, 2, 0.7)))
        result = build_urf_dt(cg, 0, ThresholdSchedule((0.0,)))
        assert result.topology.edges == ((1, 0, 0.9), (2, 0, 0.9))

    def test_cross_link_modes_agree(self):
        sched = ThresholdSchedule.parse("1:-0.01:0")
        for seed in (11, 12, 13, 14):
            cg = random_geometric(GeoParams(seed=seed))
            by_round = build_urf_dt(cg, 0, sched, cross_links="round")
            at_end = build_urf_dt(cg, 0, sched, cross_links="final")
            assert by_round.topology.edges == at_end.topology.edges
            assert by_round.hop == at_end.hop
            assert by_round.join_round == at_end.join_round

    def test_unknown_cross_link_mode_rejected(self):
        with pytest.raises(GraphError, match="cross-link"):
            build_urf_dt(self.line_graph(), 0, self.SCHED, cross_links="never")

    def test_schedule_sweep_on_random_graphs(self):
        sched = ThresholdSchedule.parse("1:-0.01:0")
        for seed in (21, 22, 23):
            cg = random_geometric(GeoParams(seed=seed))
            result = build_urf_dt(cg, 0, sched)
            assert result.unjoined == frozenset()
            assert_valid_build(cg, result)
            # Cross links are the only same-hop edges; all others go downhill.
            for u, v, _ in result.topology.edges:
                assert result.hop[u] >= result.hop[v]
