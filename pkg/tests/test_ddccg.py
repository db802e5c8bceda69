import dataclasses
import json
import math

import numpy as np
import pytest

from cosched.ddccg import (
    CoSchedule,
    CutKind,
    CutPool,
    DdccgOptions,
    add_cuts,
    brute_force_oracle,
    build_master,
    corner_scenarios,
    first_stage_feasible,
    run,
    solve_sp_oracle,
    split_problem,
    tighten_wx,
)
from cosched.ddccg.brute import all_schedules
from cosched.ddu import FrMomentModel, YieldAmbiguity, YieldCombo
from cosched.errors import IterationLimitExceeded, SplitError
from cosched.factory import build_engine_case, deterministic_model, simulate_schedule
from cosched.optkernel import solve
from cosched.scenario.synthetic import SyntheticConfig, engine_case_specs, gen_synthetic, planted_schedule, synthetic_specs
from cosched.utils.util import dumps_json

TOL = 1e-5


def _instance(seed: int, **kwargs):
    graph, bundle = gen_synthetic(SyntheticConfig(seed=seed, **kwargs))
    return graph, synthetic_specs(bundle)


def _fr(specs):
    return next(s for s in specs if isinstance(s, FrMomentModel))


class TestSplit:
    def test_stages(self, synthetic):
        graph, _, specs = synthetic
        split = split_problem(graph, specs)
        assert len(split.x_vars) == graph.n_binaries == 8
        assert split.yields is not None
        assert split.idm is not None
        assert split.wy_spec is _fr(specs)
        assert not split.degenerate

    def test_no_models_is_degenerate(self, tiny_graph):
        split = split_problem(tiny_graph)
        assert split.degenerate
        assert split.wy_spec is None
        assert corner_scenarios(split) == [None]

    def test_duplicate_model(self, synthetic):
        graph, _, specs = synthetic
        with pytest.raises(SplitError, match="more than one"):
            split_problem(graph, specs + [_fr(specs)])

    def test_load_model_too_short(self, synthetic):
        graph, _, specs = synthetic
        fr = _fr(specs)
        short = dataclasses.replace(fr, mu=fr.mu[:1], sigma=fr.sigma[:1], samples_per_hour=())
        with pytest.raises(SplitError, match="covers 1 hours"):
            split_problem(graph, [short])

    def test_load_model_on_the_wrong_stage(self, synthetic):
        graph, _, specs = synthetic
        with pytest.raises(SplitError, match="dispatch"):
            split_problem(graph, [dataclasses.replace(_fr(specs), coupled_to=("I",))])

    def test_model_on_both_stages(self, synthetic):
        graph, _, specs = synthetic
        with pytest.raises(SplitError, match="both stages"):
            split_problem(graph, [dataclasses.replace(_fr(specs), coupled_to=("I", "E_EU"))])

    def test_unknown_option(self, tiny_graph):
        spec = YieldAmbiguity({("W9", "x"): 0.9}, (YieldCombo((("W9", "x"),), 0.1),), (("W9", "x"),))
        with pytest.raises(SplitError, match="unknown options"):
            split_problem(tiny_graph, [spec])

    def test_corners_are_lexicographic(self, synthetic):
        graph, _, specs = synthetic
        split = split_problem(graph, specs)
        corners = corner_scenarios(split)
        lower, upper = split.fr_bounds()
        assert len(corners) == split.n_corners() == 4
        assert corners == sorted(corners)
        assert corners[0] == pytest.approx(tuple(lower))
        assert corners[-1] == pytest.approx(tuple(upper))


class TestSubProblem:
    def test_no_idm_fixes_zeta_at_one(self, tiny_graph):
        wx = tighten_wx(split_problem(tiny_graph), planted_schedule(tiny_graph))
        assert wx.zeta == (1.0, 1.0)
        assert wx.idm is None

    def test_greedy_never_exceeds_exact(self, synthetic):
        graph, _, specs = synthetic
        split = split_problem(graph, specs)
        for schedule in list(all_schedules(graph))[:20]:
            if not first_stage_feasible(split, schedule):
                continue
            wx = tighten_wx(split, schedule)
            exact = solve_sp_oracle(split, schedule, wx)
            greedy = solve_sp_oracle(split, schedule, wx, corners="greedy")
            assert greedy.heuristic and not exact.heuristic
            assert exact.corners_evaluated == 4
            if exact.is_finite:
                assert greedy.value <= exact.value + 1e-9

    def test_corner_cap_switches_to_greedy(self, synthetic):
        graph, _, specs = synthetic
        split = split_problem(graph, specs)
        schedule = planted_schedule(graph)
        sp = solve_sp_oracle(split, schedule, tighten_wx(split, schedule), corner_cap=2)
        assert sp.heuristic

    def test_cuts_add_recourse_copies(self, synthetic):
        graph, _, specs = synthetic
        split = split_problem(graph, specs)
        schedule = planted_schedule(graph)
        sp = solve_sp_oracle(split, schedule, tighten_wx(split, schedule))
        pool = add_cuts(CutPool(), sp, 0, split)
        assert pool.count(CutKind.OPTIMALITY) == 1
        assert pool.has_scenario(sp.u_star)
        assert all(name.endswith("@1") for name in pool.entries[0].recourse_copies)
        master = build_master(split, pool, 1)
        assert any(name.endswith("@1") for name in master.variables)

    def test_master_carries_only_coupled_columns(self, synthetic):
        graph, _, specs = synthetic
        split = split_problem(graph, specs)
        master = build_master(split, CutPool(), 0)
        names = list(master.variables)
        assert not [n for n in names if n.startswith(("alpha[", "zeta[", "theta["))]
        assert any(n.startswith("s[") for n in names)


def _check_trace(graph, specs, co, trace, seed):
    """Bounds move monotonically, the gap closes and the loop stays within |X| * |corners| iterations."""
    lbs, ubs = trace.lower_bounds, trace.upper_bounds
    assert all(b >= a - 1e-9 for a, b in zip(lbs, lbs[1:])), seed
    assert all(b <= a + 1e-9 for a, b in zip(ubs, ubs[1:])), seed
    assert co.gap <= 1e-4 + 1e-9, seed
    split = split_problem(graph, specs)
    n_x = sum(1 for schedule in all_schedules(graph) if first_stage_feasible(split, schedule))
    assert trace.iterations <= n_x * split.n_corners(), seed


class TestDdccg:
    def _check_against_oracle(self, seed):
        graph, specs = _instance(seed)
        co, trace = run(graph, specs, DdccgOptions(timing=False, max_iters=200))
        oracle = brute_force_oracle(graph, specs)
        assert abs(co.objective - oracle.value) <= TOL, seed
        _check_trace(graph, specs, co, trace, seed)
        return graph, specs, co, trace

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_matches_oracle(self, seed):
        self._check_against_oracle(seed)

    @pytest.mark.slow
    def test_matches_oracle_fuzz(self):
        for seed in range(100, 150):
            self._check_against_oracle(seed)

    @pytest.mark.slow
    def test_converges_on_fuzz_instances(self):
        for seed in range(150, 350):
            graph, specs = _instance(seed)
            co, trace = run(graph, specs, DdccgOptions(timing=False, max_iters=200))
            _check_trace(graph, specs, co, trace, seed)

    @pytest.mark.slow
    def test_engine_case_against_decision_independent_solve(self):
        """
        Dropping the yield and line-state models leaves the load box only.
        The schedule that sees them draws a flatter load and buys no more
        than 5% extra power.
        """
        graph = build_engine_case()
        specs = engine_case_specs()
        aware, _ = run(graph, specs, DdccgOptions(timing=False))
        plain, _ = run(graph, [_fr(specs)], DdccgOptions(timing=False))
        aware_var = float(np.var(aware.report.hourly["consumption"]))
        plain_var = float(np.var(plain.report.hourly["consumption"]))
        assert aware_var <= plain_var + 1e-9
        assert aware.report.purchase_cost <= 1.05 * plain.report.purchase_cost + 1e-9

    def test_bounds_are_monotone(self, synthetic):
        graph, _, specs = synthetic
        _, trace = run(graph, specs, DdccgOptions(timing=False))
        lbs, ubs = trace.lower_bounds, trace.upper_bounds
        assert all(b >= a - 1e-9 for a, b in zip(lbs, lbs[1:]))
        assert all(b <= a + 1e-9 for a, b in zip(ubs, ubs[1:]))
        assert all(lb <= ub + 1e-9 for lb, ub in zip(lbs, ubs))

    def test_iterations_bounded_by_corners(self, synthetic):
        graph, _, specs = synthetic
        _, trace = run(graph, specs, DdccgOptions(timing=False))
        assert trace.iterations <= split_problem(graph, specs).n_corners() + 1
        assert trace.records[-1].cut_kind is None
        assert all(r.elapsed_ms == 0 for r in trace.records)

    def test_no_uncertainty_is_the_deterministic_problem(self):
        graph, specs = _instance(5, intensity=0.0)
        assert [type(s) for s in specs] == [FrMomentModel]
        co, _ = run(graph, specs)
        model = deterministic_model(graph, expected_load=_fr(specs).mu)
        assert abs(co.objective - solve(model).objective_value) <= TOL

    def test_iteration_limit_keeps_incumbent(self, synthetic):
        graph, _, specs = synthetic
        with pytest.raises(IterationLimitExceeded) as err:
            run(graph, specs, DdccgOptions(max_iters=1))
        assert err.value.exit_code == 4
        assert err.value.iterations == 1
        assert len(err.value.trace) == 1
        assert isinstance(err.value.incumbent, CoSchedule)
        assert math.isfinite(err.value.incumbent.ub)

    def test_co_schedule_is_feasible_at_its_worst_case(self, synthetic):
        graph, _, specs = synthetic
        co, _ = run(graph, specs)
        report = simulate_schedule(graph, co.schedule, co.dispatch, co.worst_case)
        assert abs(report.objective - co.report.objective) <= 1e-9
        assert abs(report.objective - co.objective) <= TOL
        assert co.worst_case.expected_load is not None

    def test_learning_the_structure_still_converges(self, synthetic):
        graph, _, specs = synthetic
        co, _ = run(graph, specs, DdccgOptions(learn_structure=True))
        assert co.gap <= 1e-4 + 1e-9

    def test_co_schedule_serialises(self, synthetic):
        graph, _, specs = synthetic
        co, trace = run(graph, specs, DdccgOptions(timing=False))
        doc = json.loads(dumps_json(co.to_dict()))
        back = CoSchedule.from_dict(doc)
        assert back.schedule == co.schedule
        assert back.dispatch == co.dispatch
        assert back.objective == co.objective
        assert back.report.objective == co.report.objective
        assert len(back.dispatch_policy) == len(co.dispatch_policy)
        assert [json.loads(line)["k"] for line in trace.jsonl()] == list(range(trace.iterations))

    def test_runs_are_deterministic(self, synthetic):
        graph, _, specs = synthetic
        first, t1 = run(graph, specs, DdccgOptions(timing=False))
        second, t2 = run(graph, specs, DdccgOptions(timing=False))
        assert dumps_json(first.to_dict()) == dumps_json(second.to_dict())
        assert t1.jsonl() == t2.jsonl()
