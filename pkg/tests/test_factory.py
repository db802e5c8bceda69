import dataclasses
import itertools
import json

import pytest
from numpy.testing import assert_allclose

from conftest import tiny_plant
from cosched import naming
from cosched.ddccg import brute_force_oracle, split_problem
from cosched.ddccg.recourse import dispatch_from
from cosched.errors import ConsistencyError, InfeasibleSchedule, SchemaError, TooLargeForOracle
from cosched.factory import (
    EnergyDispatch,
    ScheduleDecision,
    UncertaintyRealization,
    build_engine_case,
    derive_profile,
    deterministic_model,
    dump_factory,
    emit_constraints,
    load_factory,
    simulate_schedule,
    validate_factory,
)
from cosched.optkernel import solve


def _checks(issues):
    return [d.check for d in issues]


class TestLoader:
    def test_engine_case_round_trip(self, tmp_path):
        graph = build_engine_case()
        path = tmp_path / "instance.json"
        path.write_text(json.dumps(dump_factory(graph)), encoding="utf-8")
        assert load_factory(str(path)) == graph
        assert load_factory(path) == graph
        assert load_factory(json.dumps(dump_factory(graph))) == graph

    def test_engine_case_shape(self):
        graph = build_engine_case()
        assert len(graph.workshops) == 12
        assert len(graph.option_keys) == 14
        assert graph.finished_buffer.id == "B11"
        assert [b.id for b in graph.outlets] == ["B12"]
        assert graph.n_binaries == 56

    def test_unknown_key_strict_and_lenient(self):
        doc = dump_factory(build_engine_case())
        doc["colour"] = "blue"
        graph, issues = validate_factory(doc)
        assert graph is None
        assert [(d.check, d.path) for d in issues] == [("schema", "$.colour")]
        graph, issues = validate_factory(doc, lenient=True)
        assert graph is not None
        assert issues == []

    def test_missing_field(self):
        doc = dump_factory(build_engine_case())
        del doc["energy"]["rtp"]
        with pytest.raises(SchemaError) as err:
            load_factory(doc)
        assert err.value.path == "$.energy.rtp"
        assert err.value.exit_code == 2

    def test_dangling_edge(self):
        doc = dump_factory(tiny_plant())
        doc["workshops"][0]["downstream_buffers"].append("NOWHERE")
        with pytest.raises(ConsistencyError, match="NOWHERE"):
            load_factory(doc)

    def test_all_problems_are_listed(self):
        doc = dump_factory(tiny_plant())
        doc["energy"]["rtp"] = [1.0]
        doc["energy"]["der_output"] = [0.0, -1.0]
        doc["energy"]["charge_eff"] = 1.5
        doc["buffers"][0]["batch"] = 0.0
        graph, issues = validate_factory(doc)
        assert graph is not None
        assert _checks(issues) == ["buffer", "rtp", "der", "energy"]

    def test_horizon_must_be_positive(self):
        doc = dump_factory(tiny_plant())
        doc["horizon"] = 0
        doc["energy"]["rtp"] = []
        doc["energy"]["der_output"] = []
        _, issues = validate_factory(doc)
        assert "horizon" in _checks(issues)

    def test_bad_json_and_missing_file(self, tmp_path):
        with pytest.raises(SchemaError, match="invalid JSON"):
            load_factory("{not json")
        with pytest.raises(SchemaError, match="not found"):
            load_factory(str(tmp_path / "absent.json"))


class TestSchedule:
    def test_one_option_per_workshop_and_hour(self, tiny_graph):
        schedule = ScheduleDecision.from_triplets(2, [(0, "W1", "slow"), (0, "W1", "fast")])
        with pytest.raises(InfeasibleSchedule) as err:
            schedule.check(tiny_graph)
        assert err.value.constraint == "4a"
        assert err.value.hour == 0

    def test_tensor_and_values(self, tiny_graph):
        schedule = ScheduleDecision.from_triplets(2, [(1, "W1", "fast")])
        assert schedule.tensor(tiny_graph).tolist() == [[[0, 0]], [[0, 1]]]
        assert sum(schedule.values(tiny_graph).values()) == 1.0
        assert schedule.triplets() == [(1, "W1", "fast")]


class TestSimulate:
    def test_single_slow_run(self, tiny_graph):
        """
        slow at hour 0: 10 raw in, 8 finished and 8 by-product out.
        transport time 1 + 10/10*0.1 + 8/10*0.1 = 1.18, equipment 2 * 1.18,
        purchase 10 kWh at 1, revenue 3 * 8.
        """
        schedule = ScheduleDecision.from_triplets(2, [(0, "W1", "slow")])
        report = simulate_schedule(tiny_graph, schedule, EnergyDispatch.idle(2), UncertaintyRealization())
        assert_allclose(report.equipment_cost, 2.36)
        assert_allclose(report.purchase_cost, 10.0)
        assert report.degradation_cost == 0.0
        assert report.fr_penalty == 0.0
        assert_allclose(report.main_revenue, 24.0)
        assert report.by_revenue == 0.0
        assert_allclose(report.objective, 2.36 + 10.0 - 24.0)
        assert report.hourly["soc"] == [5.0, 5.0, 5.0]

    def test_realized_yield_scales_output(self, tiny_graph):
        schedule = ScheduleDecision.from_triplets(2, [(0, "W1", "slow")])
        real = UncertaintyRealization(yields={(0, "W1", "slow"): 0.5})
        report = simulate_schedule(tiny_graph, schedule, EnergyDispatch.idle(2), real)
        assert_allclose(report.main_revenue, 12.0)

    def test_battery_and_byproduct_sales(self, tiny_graph):
        schedule = ScheduleDecision.from_triplets(2, [(0, "W1", "slow")])
        dispatch = EnergyDispatch(
            e_eu=(5.0, 0.0),
            e_lu=(0.0, 0.0),
            e_su=(0.0, 0.0),
            byproduct_sales={"BP": (0.0, 8.0)},
        )
        real = UncertaintyRealization(expected_load=(4.0, 1.0), zeta=(1.0, 0.5))
        report = simulate_schedule(tiny_graph, schedule, dispatch, real)
        assert_allclose(report.purchase_cost, 5.0)
        assert report.hourly["soc"] == [5.0, 0.0, 0.0]
        assert_allclose(report.by_revenue, 4.0)
        # |5 - 4| + |0 - 1| at 0.5
        assert_allclose(report.fr_penalty, 1.0)

    def test_raw_stock_runs_out(self):
        graph = tiny_plant(horizon=3)
        schedule = ScheduleDecision.from_triplets(3, [(h, "W1", "slow") for h in range(3)])
        with pytest.raises(InfeasibleSchedule) as err:
            simulate_schedule(graph, schedule, EnergyDispatch.idle(3), UncertaintyRealization())
        assert (err.value.constraint, err.value.hour) == ("6a", 3)

    def test_sales_ahead_of_stock(self, tiny_graph):
        schedule = ScheduleDecision.from_triplets(2, [(0, "W1", "slow")])
        dispatch = EnergyDispatch((0.0, 0.0), (0.0, 0.0), (0.0, 0.0), byproduct_sales={"BP": (8.0, 0.0)})
        with pytest.raises(InfeasibleSchedule) as err:
            simulate_schedule(tiny_graph, schedule, dispatch, UncertaintyRealization())
        assert err.value.constraint == "6d"

    def test_battery_cannot_go_below_empty(self, tiny_graph):
        schedule = ScheduleDecision.from_triplets(2, [(0, "W1", "fast"), (1, "W1", "slow")])
        dispatch = EnergyDispatch((5.0, 5.0), (0.0, 0.0), (0.0, 0.0))
        with pytest.raises(InfeasibleSchedule) as err:
            simulate_schedule(tiny_graph, schedule, dispatch, UncertaintyRealization())
        assert (err.value.constraint, err.value.hour) == ("7e", 2)

    def test_grid_cap(self):
        graph = tiny_plant(grid_cap=5.0)
        schedule = ScheduleDecision.from_triplets(2, [(0, "W1", "slow")])
        with pytest.raises(InfeasibleSchedule) as err:
            simulate_schedule(graph, schedule, EnergyDispatch.idle(2), UncertaintyRealization())
        assert err.value.constraint == "7g"

    def test_der_must_exist(self, tiny_graph):
        schedule = ScheduleDecision.from_triplets(2, [(0, "W1", "slow")])
        dispatch = EnergyDispatch((0.0, 0.0), (3.0, 0.0), (0.0, 0.0))
        with pytest.raises(InfeasibleSchedule) as err:
            simulate_schedule(tiny_graph, schedule, dispatch, UncertaintyRealization())
        assert err.value.constraint == "7b"

    def test_profile_stocks(self, tiny_graph):
        schedule = ScheduleDecision.from_triplets(2, [(0, "W1", "fast"), (1, "W1", "slow")])
        profile = derive_profile(tiny_graph, schedule)
        assert profile.stocks["RAW"].tolist() == [20.0, 10.0, 0.0]
        assert profile.stocks["OUT"].tolist() == [0.0, 10.0, 18.0]
        assert profile.energy.tolist() == [20.0, 10.0]


class TestDeterministicModel:
    def test_matches_exhaustive_search(self, tiny_graph):
        solution = solve(deterministic_model(tiny_graph))
        assert solution.is_optimal
        oracle = brute_force_oracle(tiny_graph)
        assert abs(solution.objective_value - oracle.value) <= 1e-6

    def test_solution_simulates_to_its_objective(self):
        graph = tiny_plant(der=4.0)
        solution = solve(deterministic_model(graph))
        schedule = ScheduleDecision.from_values(graph, solution.values)
        dispatch = dispatch_from(split_problem(graph), solution.values)
        report = simulate_schedule(graph, schedule, dispatch, UncertaintyRealization())
        assert abs(report.objective - solution.objective_value) <= 1e-6

    def test_oracle_refuses_large_instances(self):
        with pytest.raises(TooLargeForOracle):
            brute_force_oracle(build_engine_case())


class TestEmitConstraints:
    def _one_option_plant(self, horizon, min_uptime):
        graph = tiny_plant(horizon=horizon)
        ws = graph.workshops[0]
        option = dataclasses.replace(ws.options[0], min_uptime=min_uptime)
        return dataclasses.replace(graph, workshops=(dataclasses.replace(ws, options=(option,)),))

    def _block(self, graph, tag):
        return next(b for b in emit_constraints(graph) if b.tag == tag)

    def test_one_uniqueness_row(self):
        graph = tiny_plant(horizon=1)
        rows = self._block(graph, "4a").rows
        assert len(rows) == 1
        assert rows[0].satisfied({naming.I(0, "W1", "slow"): 1.0, naming.I(0, "W1", "fast"): 0.0})
        assert not rows[0].satisfied({naming.I(0, "W1", "slow"): 1.0, naming.I(0, "W1", "fast"): 1.0})

    def test_every_block_is_tagged(self, tiny_graph):
        tags = [b.tag for b in emit_constraints(tiny_graph)]
        for tag in ("4a", "4c", "4d", "4e", "5", "6a", "6b", "6d", "6e", "7a", "7b", "7d", "7e", "7f"):
            assert tag in tags

    def test_min_uptime_accepts_long_runs_only(self):
        """Runs shorter than three hours are rejected unless they reach the horizon end."""
        H, L = 5, 3
        graph = self._one_option_plant(H, L)
        rows = self._block(graph, "5").rows
        for bits in itertools.product((0, 1), repeat=H):
            values = {naming.I(h, "W1", "slow"): float(b) for h, b in enumerate(bits)}
            accepted = all(row.satisfied(values) for row in rows)
            runs = []
            h = 0
            while h < H:
                if bits[h]:
                    start = h
                    while h < H and bits[h]:
                        h += 1
                    runs.append((start, h))
                h += 1
            expected = all(end - start >= L or end == H for start, end in runs)
            assert accepted == expected, bits

    def test_buffer_recursion_row(self, tiny_graph):
        row = next(r for r in self._block(tiny_graph, "6a").rows if r.name == "6a[0,OUT]")
        values = {
            naming.B(0, "OUT"): 0.0,
            naming.B(1, "OUT"): 8.0,
            naming.I(0, "W1", "slow"): 1.0,
            naming.I(0, "W1", "fast"): 0.0,
        }
        assert row.satisfied(values)
        values[naming.B(1, "OUT")] = 9.0
        assert not row.satisfied(values)
