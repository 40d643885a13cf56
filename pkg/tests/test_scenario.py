import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cems.domain import ExogenousData
from cems.errors import InputError
from cems.scenario import (CovModel, ScenarioSet, conditional_mean_deviation, draw_truth,
                           generate_day_ahead, most_probable, read_scenarios_csv,
                           update_hourly, write_scenarios_csv)

CLEAR = np.clip(900 * np.sin(np.pi * (np.arange(24) - 5) / 15), 0, None).round(3)


def _exo(clear=CLEAR):
    return ExogenousData(t_out=np.full(24, 25.0), clear_sky_irr=clear,
                         reg_signal=np.zeros(43200))


class TestDayAhead:
    def test_zero_variance_is_clear_sky(self):
        s = generate_day_ahead(_exo(), CovModel(0.0, 2.0, 3), 10)
        assert np.array_equal(s.scenarios, np.tile(CLEAR, (10, 1)))

    def test_night_is_zero(self):
        s = generate_day_ahead(_exo(), CovModel(0.3, 2.0, 1), 10)
        night = CLEAR == 0
        assert night[:6].all() and night[20:].all()
        assert np.all(s.scenarios[:, night] == 0.0)

    def test_sample_mean_near_clear_sky(self):
        cov = CovModel(0.05, 2.0, 42)
        s = generate_day_ahead(_exo(), cov, 10)
        day = CLEAR > 0
        band = 3 * cov.marginal_std * CLEAR[day] / math.sqrt(10)
        assert np.all(np.abs(s.scenarios.mean(axis=0)[day] - CLEAR[day]) <= band)

    def test_uniform_weights_and_errors(self):
        s = generate_day_ahead(_exo(), CovModel(seed=5), 7)
        assert np.all(s.weights == 1.0 / 7)
        assert s.anchor_step == 0
        with pytest.raises(InputError):
            generate_day_ahead(_exo(), CovModel(), 0)
        with pytest.raises(InputError):
            CovModel(-0.1)
        with pytest.raises(InputError):
            CovModel(0.1, 0.0)

    def test_deterministic(self):
        a = generate_day_ahead(_exo(), CovModel(seed=9), 10)
        b = generate_day_ahead(_exo(), CovModel(seed=9), 10)
        c = generate_day_ahead(_exo(), CovModel(seed=10), 10)
        assert np.array_equal(a.scenarios, b.scenarios)
        assert not np.array_equal(a.scenarios, c.scenarios)

    def test_truth_is_independent_draw(self):
        cov = CovModel(seed=9)
        truth = draw_truth(_exo(), cov)
        assert np.array_equal(truth, draw_truth(_exo(), cov))
        sset = generate_day_ahead(_exo(), cov, 10)
        assert not any(np.array_equal(truth, g) for g in sset.scenarios)
        assert np.all((truth >= 0) & (truth <= CLEAR))


class TestUpdate:
    def test_k0_equals_day_ahead(self):
        cov = CovModel(seed=4)
        day = generate_day_ahead(_exo(), cov, 10)
        upd = update_hourly(day, cov, 0, [])
        assert np.array_equal(upd.scenarios, day.scenarios)

    def test_clear_sky_observations_keep_mean(self):
        cov = CovModel(seed=4)
        upd = update_hourly(generate_day_ahead(_exo(), cov, 10), cov, 9, CLEAR[:9])
        np.testing.assert_array_equal(upd.mean_deviation, 0.0)

    def test_closed_form_decay(self):
        # 20% below clear sky at k-1, 2 h correlation length, 1 h steps
        cov = CovModel(0.15, 2.0, 0)
        k = 10
        obs = CLEAR[:k].copy()
        obs[k - 1] *= 0.8
        upd = update_hourly(generate_day_ahead(_exo(), cov, 5), cov, k, obs)
        expected = -0.2 * math.exp(-1.5)
        assert upd.mean_deviation[2] == pytest.approx(expected, abs=1e-9)
        assert expected == pytest.approx(-0.04463, abs=1e-5)
        lags = np.arange(1, 24 - k + 1)
        np.testing.assert_allclose(upd.mean_deviation, -0.2 * np.exp(-lags / 2.0), atol=1e-12)

    def test_decay_uses_hours(self):
        cov = CovModel(0.15, 2.0, 0, step_hours=0.5)
        mean = conditional_mean_deviation(cov, 48, 10, -0.2)
        assert mean[2] == pytest.approx(-0.2 * math.exp(-0.75), abs=1e-12)

    def test_errors(self):
        cov = CovModel()
        s = generate_day_ahead(_exo(), cov, 3)
        with pytest.raises(InputError):
            update_hourly(s, cov, 25, CLEAR)
        with pytest.raises(InputError):
            update_hourly(s, cov, 5, CLEAR[:3])
        with pytest.raises(InputError):
            update_hourly(s, cov, 8, CLEAR[:8] + 1000.0)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 24), st.integers(0, 10_000), st.integers(1, 12),
           st.floats(0.0, 0.5), st.floats(0.0, 1.0))
    def test_invariants(self, k, seed, S, std, frac):
        cov = CovModel(std, 2.0, seed)
        s = generate_day_ahead(_exo(), cov, S)
        obs = CLEAR * frac
        u = update_hourly(s, cov, k, obs)
        for sset in (s, u):
            assert abs(sset.weights.sum() - 1.0) <= 1e-12
            assert np.all(sset.scenarios >= 0.0)
            assert np.all(sset.scenarios <= CLEAR)
        assert u.anchor_step == k
        assert np.array_equal(u.scenarios[:, :k], np.tile(obs[:k], (S, 1)))
        again = update_hourly(s, cov, k, obs)
        assert np.array_equal(again.scenarios, u.scenarios)


class TestMostProbable:
    def test_strict_argmax(self):
        g = np.arange(9, dtype=float).reshape(3, 3)
        assert np.array_equal(most_probable(ScenarioSet(g, [0.5, 0.25, 0.25])), g[0])

    def test_closest_to_mean(self):
        g = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])
        assert np.array_equal(most_probable(ScenarioSet(g, np.full(3, 1 / 3))), g[1])

    def test_identical_rows(self):
        g = np.ones((4, 3))
        assert np.array_equal(most_probable(ScenarioSet(g, np.full(4, 0.25))), g[0])

    def test_bad_weights(self):
        with pytest.raises(InputError):
            ScenarioSet(np.ones((2, 3)), [0.6, 0.6])
        with pytest.raises(InputError):
            ScenarioSet(np.ones((2, 3)), [1.0])


class TestCsv:
    def test_round_trip(self, tmp_path):
        s = generate_day_ahead(_exo(), CovModel(seed=2), 4)
        back = read_scenarios_csv(write_scenarios_csv(s, tmp_path / "s.csv"), CLEAR)
        assert np.array_equal(back.scenarios, s.scenarios)
        assert np.array_equal(back.weights, s.weights)

    def test_bad_header(self, tmp_path):
        p = tmp_path / "s.csv"
        p.write_text("t,scenario,g\n0,0,1.0\n")
        with pytest.raises(InputError, match="header"):
            read_scenarios_csv(p)
