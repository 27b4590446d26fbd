import os
from fractions import Fraction

import pytest

from btt import (CapacityError, EdgeCover, SignedGraph, cc_cost, exact_btt,
                 exact_btt_positive_only, exact_cc, gen_figure2, gen_hexagram,
                 gen_integrality_gap, gen_random, gen_vc_reduction,
                 is_feasible_cover, ratio_survey, sandwich_report, solve_exact)
from btt.errors import BudgetExceededError
from btt.exact import survey_rows_to_csv
from btt.graphs import complete_graph
from btt.lp import greedy_maximal_packing
from btt.rng import spawn_seeds
from conftest import (brute_force_min_cc, brute_force_min_cover,
                      brute_force_vertex_cover, instance_suite)


class TestExactBtt:
    def test_figure2_optimum_four(self):
        g = gen_figure2()
        res = exact_btt(g)
        assert res.value == 4
        assert is_feasible_cover(g, res.witness)
        assert res.witness.cost == 4

    def test_figure2_known_optima_are_optimal(self):
        g = gen_figure2()
        published = EdgeCover.from_pairs(g, [(0, 2), (0, 4), (1, 5), (3, 5)])
        all_negative = EdgeCover.from_ids(g, g.negative_edge_ids())
        assert is_feasible_cover(g, published) and published.cost == 4
        assert is_feasible_cover(g, all_negative) and all_negative.cost == 4

    def test_gap5_optimum_is_n_minus_one(self):
        assert exact_btt(gen_integrality_gap(5)).value == 4

    def test_empty_triangle_set(self):
        g = complete_graph(4, lambda u, v: 1)
        res = exact_btt(g)
        assert res.value == 0 and res.witness.size == 0

    def test_matches_brute_force_on_random_suite(self):
        for g in instance_suite(14, seed=2024):
            if g.m > 16:
                continue
            assert exact_btt(g).value == brute_force_min_cover(g)

    def test_weighted_optimum(self):
        g = SignedGraph(3, [(0, 1, 1, Fraction(1, 3)), (0, 2, 1, 5),
                            (1, 2, -1, 2)])
        res = exact_btt(g)
        assert res.value == Fraction(1, 3)

    def test_triangle_budget(self):
        with pytest.raises(CapacityError):
            exact_btt(gen_figure2(), triangle_budget=2)

    def test_node_budget_carries_bounds(self):
        g = gen_random(9, positive_prob=0.5, complete=True, seed=1)
        with pytest.raises(BudgetExceededError) as err:
            exact_btt(g, node_budget=3)
        lower, upper = err.value.bounds
        assert lower <= exact_btt(g).value <= upper

    def test_incumbent_trail_is_decreasing(self):
        res = exact_btt(gen_figure2())
        values = [v for _, v in res.trail]
        assert values == sorted(values, reverse=True)
        assert res.root_lower_bound <= res.value


class TestPositiveOnly:
    def test_single_bad_triangle_uses_one_positive_edge(self):
        g = SignedGraph(3, [(0, 1, 1), (0, 2, 1), (1, 2, -1)])
        res = exact_btt_positive_only(g)
        assert res.value == 1
        (eid,) = res.witness.edge_ids
        assert g.edges[eid].sign == 1

    def test_hexagram_has_exactly_two_optima(self):
        g, gmap = gen_hexagram()
        res = exact_btt_positive_only(g, enumerate_optima=64)
        assert res.value == 9
        assert not res.optima_truncated
        hexa = gmap.hexagrams[0]
        expected = {
            frozenset(g.edge_id(u, v) for u, v in hexa.teeth_pairs("even")),
            frozenset(g.edge_id(u, v) for u, v in hexa.teeth_pairs("odd")),
        }
        assert set(res.optima) == expected

    def test_cycle_reduction_matches_vertex_cover(self):
        edges = [(0, 1), (1, 2), (2, 3), (0, 3)]
        g = gen_vc_reduction(4, edges)
        res = exact_btt_positive_only(g)
        assert res.value == brute_force_vertex_cover(4, edges) == 2

    def test_coincides_with_unrestricted_on_reduction_graphs(self):
        for s in spawn_seeds(88, 6):
            base = gen_random(6, positive_prob=0.4, complete=False,
                              density=0.6, seed=s)
            edges = [(e.u, e.v) for e in base.edges]
            g = gen_vc_reduction(6, edges)
            assert exact_btt(g).value == exact_btt_positive_only(g).value
        g, _ = gen_hexagram()
        assert exact_btt(g).value == exact_btt_positive_only(g).value == 9

    def test_enumeration_cap_flag(self):
        g = gen_integrality_gap(4)  # several optimal covers exist
        res = exact_btt_positive_only(g, enumerate_optima=1)
        assert res.optima_truncated and len(res.optima) == 1


class TestExactCc:
    def test_figure2(self):
        g = gen_figure2()
        res = exact_cc(g)
        assert res.value == 4
        assert cc_cost(g, res.witness) == 4

    def test_all_positive_single_cluster(self):
        g = complete_graph(5, lambda u, v: 1)
        res = exact_cc(g)
        assert res.value == 0 and res.witness.num_clusters == 1

    def test_gap5(self):
        res = exact_cc(gen_integrality_gap(5))
        assert res.value == 4

    def test_matches_brute_force_on_random_suite(self):
        for g in instance_suite(10, seed=404):
            if g.n > 7:
                continue
            assert exact_cc(g).value == brute_force_min_cc(g)

    def test_lower_bound_early_exit_same_value(self):
        g = gen_figure2()
        plain = exact_cc(g)
        primed = exact_cc(g, lower_bound=4)
        assert plain.value == primed.value == 4
        assert primed.nodes_explored <= plain.nodes_explored

    def test_node_cap(self):
        g = complete_graph(13, lambda u, v: 1)
        with pytest.raises(CapacityError):
            exact_cc(g)

    def test_node_budget(self):
        g = gen_random(9, positive_prob=0.5, complete=True, seed=2)
        with pytest.raises(BudgetExceededError):
            exact_cc(g, node_budget=3)


class TestSandwich:
    def test_complete_unit_instances_have_no_violations(self):
        for s in spawn_seeds(55, 10):
            g = gen_random(7, positive_prob=0.5, complete=True, seed=s)
            report = sandwich_report(g)
            assert report["violations"] == []
            assert set(report["checks"]) == {
                "lp_le_cover", "cover_le_clustering", "packing_le_lp",
                "cover_le_3_packing", "clustering_le_1.5_cover"}

    def test_weighted_instances_check_applicable_subset(self):
        g = gen_random(6, positive_prob=0.5, complete=True,
                       weights=("rational", 4, 3), seed=9)
        report = sandwich_report(g)
        assert report["violations"] == []
        assert "packing_le_lp" not in report["checks"]
        assert "clustering_le_1.5_cover" not in report["checks"]


class TestRatioSurvey:
    @staticmethod
    def make_complete(n):
        def make(seed):
            return gen_random(n, positive_prob=0.5, complete=True, seed=seed)
        return make

    def test_ratios_within_bounds_on_complete_suite(self):
        report = ratio_survey(self.make_complete(6), 15, seed=10)
        assert report["violations"] == []
        for row in report["rows"]:
            assert row["error"] is None
            assert 1 <= row["ratio"] <= Fraction(3, 2)

    def test_triangle_free_instance_reports_ratio_one(self):
        def make(seed):
            return gen_random(6, positive_prob=1.0, complete=True, seed=seed)
        report = ratio_survey(make, 3, seed=1)
        assert all(row["ratio"] == 1 for row in report["rows"])

    def test_budget_error_recorded_and_survey_continues(self):
        calls = []

        def make(seed):
            calls.append(seed)
            if len(calls) == 2:
                return complete_graph(14, lambda u, v: 1 if (u + v) % 2 else -1)
            return gen_random(5, positive_prob=0.5, complete=True, seed=seed)

        report = ratio_survey(make, 4, seed=3)
        errors = [row for row in report["rows"] if row["error"]]
        assert len(errors) == 1
        assert sum(1 for row in report["rows"] if row["error"] is None) == 3

    def test_out_of_band_ratio_flagged_and_serialised(self, tmp_path):
        # a bad triangle plus a disjoint bad four-cycle: minimum cover 1,
        # minimum clustering 2, ratio 2 (outside [1, 3/2]; such graphs are
        # not complete, which is the point)
        def make(seed):
            return SignedGraph(7, [
                (0, 1, 1), (0, 2, 1), (1, 2, -1),
                (3, 4, 1), (4, 5, 1), (5, 6, 1), (3, 6, -1)])

        report = ratio_survey(make, 1, seed=0, dump_dir=str(tmp_path))
        assert report["violations"] == [0]
        (candidate,) = report["equality_counterexample_candidates"]
        assert candidate["ratio"] == 2
        assert "n 7" in candidate["edge_list"]
        assert (tmp_path / "candidate_0.txt").exists()

    def test_worker_fanout_matches_serial(self):
        serial = ratio_survey(self.make_complete(5), 6, seed=12, workers=1)
        parallel = ratio_survey(self.make_complete(5), 6, seed=12, workers=2)
        strip = lambda rows: [(r["instance"], r["opt_cover"], r["opt_clustering"],
                               r["ratio"]) for r in rows]
        assert strip(serial["rows"]) == strip(parallel["rows"])

    def test_workers_env_variable(self, monkeypatch):
        from btt.exact import workers_from_env
        monkeypatch.setenv("BTT_WORKERS", "3")
        assert workers_from_env() == 3
        monkeypatch.setenv("BTT_WORKERS", "junk")
        assert workers_from_env() == 1

    def test_csv_rendering(self):
        report = ratio_survey(self.make_complete(5), 3, seed=6)
        csv = survey_rows_to_csv(report["rows"])
        lines = csv.strip().splitlines()
        assert lines[0].startswith("instance,seed,n,")
        assert len(lines) == 4


class TestWitnessIntegrity:
    def test_witnesses_revalidated_through_graph_evaluators(self):
        for g in instance_suite(8, seed=777):
            res = exact_btt(g)
            assert is_feasible_cover(g, res.witness)
            assert sum(g.edges[i].weight for i in res.witness.edge_ids) == res.value
            cc = exact_cc(g)
            assert cc_cost(g, cc.witness) == cc.value
            assert len(cc.witness.labels) == g.n

    def test_every_cover_cost_at_least_lp(self):
        for g in instance_suite(8, seed=101):
            lp = solve_exact(g).value
            assert exact_btt(g).value >= lp
            assert len(greedy_maximal_packing(g)) <= 3 * max(1, exact_btt(g).value)
