import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cosched.ddu import FrMomentModel, LineState, ProductStructureIdm, YieldAmbiguity, fr_box
from cosched.errors import ConsistencyError, MissingHour, SchemaError
from cosched.factory import EnergyDispatch, UncertaintyRealization, build_engine_case, simulate_schedule
from cosched.scenario import (
    SamplerConfig,
    SyntheticConfig,
    engine_case_specs,
    fit_ddu_params,
    fit_specs,
    gen_synthetic,
    load_history,
    monte_carlo_eval,
    planted_schedule,
    save_history,
    specs_from_dict,
    specs_to_dict,
)
from cosched.scenario.history import LOADS_FILE, LineRecord, history_from_samples
from cosched.scenario.montecarlo import nearest_dispatch, sample_loads
from cosched.scenario.synthetic import rng_for
from cosched.utils.util import dumps_json


def _bundle():
    states = (LineState("A", (("W1", "slow"),)), LineState("B", (("W1", "fast"),)))
    records = (LineRecord(0, "A", 3.0, 0.4), LineRecord(0, "B", 1.0, 0.2), LineRecord(1, "A", 2.0, 0.6))
    return history_from_samples(
        2,
        [[10.0, 12.0, 14.0], [20.0, 20.0]],
        records,
        states,
        rtp_profile=[1.0, 2.0],
        ddu={"knobs": {"gamma1": 0.25, "gamma2": 2.0}},
    )


class TestHistory:
    def test_save_and_load(self, tmp_path):
        bundle = _bundle()
        save_history(bundle, tmp_path / "hist")
        assert load_history(tmp_path / "hist", 2) == bundle

    def test_loads_file_is_required(self, tmp_path):
        with pytest.raises(SchemaError, match=LOADS_FILE):
            load_history(tmp_path, 2)

    def test_missing_columns(self, tmp_path):
        (tmp_path / LOADS_FILE).write_text("hour,kwh\n0,1.0\n", encoding="utf-8")
        with pytest.raises(SchemaError, match="missing columns"):
            load_history(tmp_path, 1)

    def test_hour_outside_horizon(self, tmp_path):
        (tmp_path / LOADS_FILE).write_text("hour,sample_kwh\n0,1.0\n3,2.0\n", encoding="utf-8")
        with pytest.raises(ConsistencyError, match="outside"):
            load_history(tmp_path, 2)

    def test_undeclared_state(self):
        with pytest.raises(ConsistencyError, match="undeclared"):
            history_from_samples(1, [[1.0]], [LineRecord(0, "ghost", 1.0, 0.1)])


class TestFit:
    def test_moments_and_counts(self):
        fr, idm = fit_ddu_params(_bundle())
        assert_allclose(fr.mu, [12.0, 20.0])
        assert_allclose(fr.sigma, [math.sqrt(8.0 / 3.0), 0.0])
        assert fr.samples_per_hour == (3, 2)
        assert (fr.gamma1, fr.gamma2) == (0.25, 2.0)
        assert idm.hist_counts == ((3.0, 1.0), (2.0, 0.0))
        assert idm.rt_counts == ()
        assert_allclose(idm.ratios, [0.5, 0.2])

    def test_overrides_win(self):
        fr, _ = fit_ddu_params(_bundle(), {"gamma2": 5.0, "epsilon": 0.1, "gamma1": None})
        assert (fr.gamma1, fr.gamma2, fr.epsilon) == (0.25, 5.0, 0.1)

    def test_every_hour_needs_loads(self):
        bundle = history_from_samples(3, [[1.0], [2.0]])
        with pytest.raises(MissingHour) as err:
            fit_specs(bundle)
        assert err.value.hour == 2

    def test_specs_round_trip(self):
        specs = engine_case_specs()
        again = specs_from_dict(specs_to_dict(specs))
        assert [type(s) for s in again] == [YieldAmbiguity, ProductStructureIdm, FrMomentModel]
        assert again == specs

    def test_malformed_document(self):
        with pytest.raises(SchemaError):
            specs_from_dict({"fr": {"mu": [1.0]}})


class TestSynthetic:
    def test_deterministic(self):
        config = SyntheticConfig(seed=11, workshops=3, horizon=3)
        assert gen_synthetic(config) == gen_synthetic(config)
        other, _ = gen_synthetic(SyntheticConfig(seed=12, workshops=3, horizon=3))
        assert other != gen_synthetic(config)[0]

    def test_serial_layout(self):
        graph, bundle = gen_synthetic(SyntheticConfig(seed=4, workshops=3, options_per_workshop=2, horizon=2))
        assert [b.id for b in graph.buffers] == ["B0", "B1", "B2", "B3", "BP"]
        assert graph.finished_buffer.id == "B3"
        assert graph.workshops[0].downstream_buffers == ("B1", "BP")
        assert len(bundle.load_samples) == 2
        assert all(len(s) == 24 for s in bundle.load_samples)

    def test_rounded_to_three_decimals(self, synthetic):
        graph, _, _ = synthetic
        for key in graph.option_keys:
            energy = graph.option(key).energy_cost
            assert energy == round(energy, 3)

    def test_planted_schedule_is_feasible(self, synthetic):
        graph, _, _ = synthetic
        schedule = planted_schedule(graph)
        assert len(schedule.active) == graph.horizon * len(graph.workshops)
        simulate_schedule(graph, schedule, EnergyDispatch.idle(graph.horizon), UncertaintyRealization())

    def test_zero_intensity_has_only_a_load_model(self):
        _, bundle = gen_synthetic(SyntheticConfig(seed=2, intensity=0.0))
        specs = fit_specs(bundle)
        assert [type(s) for s in specs] == [FrMomentModel]
        lower, upper = fr_box(specs[0], 2)
        assert_allclose(lower, upper)

    def test_engine_specs_fit_the_engine_case(self):
        graph = build_engine_case()
        keys = set(graph.option_keys)
        yields, idm, fr = engine_case_specs()
        assert set(yields.corrected_set) <= keys
        assert all(m in keys for s in idm.states for m in s.members)
        assert fr.horizon == graph.horizon


class TestSampler:
    def test_nominal(self, rng):
        model = FrMomentModel(mu=(1.0, 2.0), sigma=(3.0, 4.0))
        draws = sample_loads(model, 2, 5, rng, SamplerConfig(load_law="nominal"))
        assert draws.tolist() == [[1.0, 2.0]] * 5

    def test_truncation(self, rng):
        model = FrMomentModel(mu=(0.0,), sigma=(1.0,))
        draws = sample_loads(model, 1, 5000, rng, SamplerConfig(truncation=1.0))
        assert np.abs(draws).max() <= 1.0

    def test_two_point_moments(self, rng):
        model = FrMomentModel(mu=(10.0,), sigma=(2.0,), epsilon=0.1)
        draws = sample_loads(model, 1, 200_000, rng, SamplerConfig(load_law="two_point"))
        assert len(np.unique(draws)) == 2
        assert abs(draws.mean() - 10.0) <= 0.05
        assert abs(draws.std() - 2.0) <= 0.05

    @pytest.mark.parametrize("epsilon", [0.05, 0.10])
    def test_gaussian_loads_respect_the_box(self, epsilon):
        _, _, fr = engine_case_specs(epsilon=epsilon)
        draws = sample_loads(fr, 4, 10_000, rng_for(2024), SamplerConfig())
        lower, upper = fr_box(fr, 4)
        outside = (draws < lower) | (draws > upper)
        assert outside.mean() <= epsilon + 0.02

    def test_bad_law(self):
        with pytest.raises(ValueError):
            SamplerConfig(load_law="cauchy")


class TestMonteCarlo:
    def test_same_seed_same_summary(self, synthetic, planted_co):
        graph, _, specs = synthetic
        first = monte_carlo_eval(graph, planted_co, specs, 200, seed=9)
        second = monte_carlo_eval(graph, planted_co, specs, 200, seed=9, workers=3)
        assert dumps_json(first.to_dict()) == dumps_json(second.to_dict())

    def test_summary_shape(self, synthetic, planted_co):
        graph, _, specs = synthetic
        summary = monte_carlo_eval(graph, planted_co, specs, 100, seed=1)
        assert summary.n == 100
        assert summary.q05 <= summary.mean_objective <= summary.q95
        assert 0.0 <= summary.fr_violation_rate <= 1.0
        assert set(summary.term_means) == {
            "equipment_cost",
            "degradation_cost",
            "purchase_cost",
            "fr_penalty",
            "main_revenue",
            "by_revenue",
        }

    def test_needs_a_trial(self, synthetic, planted_co):
        graph, _, specs = synthetic
        with pytest.raises(ValueError):
            monte_carlo_eval(graph, planted_co, specs, 0, seed=1)

    def test_nearest_dispatch_falls_back(self, planted_co):
        assert nearest_dispatch(planted_co, None) is planted_co.dispatch
        assert nearest_dispatch(planted_co, (1.0, 2.0)) is planted_co.dispatch
