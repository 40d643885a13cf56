import dataclasses as dc
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cems.datasets import bundled, zero_demand
from cems.domain import (COMFORT_COEFFS, EssParams, HvacZoneParams, PvParams, TimeGrid,
                         comfort_sigma, pv_output, require_valid, validate_config)
from cems.errors import InputError

from conftest import small_config


def _zone(cfg, **kw):
    b = cfg.buildings[0]
    z = dc.replace(b.zones[0], **kw)
    return dc.replace(cfg, buildings=(dc.replace(b, zones=(z,)),))


def _exact_sigma(t):
    a, b, c = (Fraction(str(v)) for v in COMFORT_COEFFS)
    t = Fraction(t)
    return float(a * t * t + b * t + c)


class TestValidate:
    def test_bundled_is_valid(self):
        assert validate_config(bundled()) == []
        assert validate_config(zero_demand()) == []

    def test_paper_efficiencies_are_valid(self):
        cfg = small_config()
        b = cfg.buildings[0]
        ess = dc.replace(b.ess, eta_ch=0.9, eta_dis=0.8)
        assert validate_config(dc.replace(cfg, buildings=(dc.replace(b, ess=ess),))) == []

    def test_degenerate_temperature_interval(self):
        cfg = _zone(small_config(), temp_min_c=22.0, temp_max_c=22.0, temp_init_c=22.0)
        v = validate_config(cfg)
        assert len(v) == 1
        assert "temp_min_c/temp_max_c" in v[0].path

    def test_unstable_thermal_update(self):
        # C*R = 0.5 h against a 1 h step
        cfg = _zone(small_config(), heat_capacity=1.0, thermal_resistance=0.5)
        v = validate_config(cfg)
        assert [x.path for x in v] == ["buildings[0].zones[0].heat_capacity*thermal_resistance"]

    def test_export_above_import(self):
        cfg = small_config()
        pr = dc.replace(cfg.prices, lambda_export=np.full(24, 0.2))
        v = validate_config(dc.replace(cfg, prices=pr))
        assert any(x.path == "prices.lambda_export" for x in v)

    def test_series_length_and_signal_range(self):
        cfg = small_config()
        reg = np.full(cfg.time.rt_length, 1.5)
        exo = dc.replace(cfg.exogenous, reg_signal=reg, t_out=np.zeros(5))
        paths = [x.path for x in validate_config(dc.replace(cfg, exogenous=exo))]
        assert "exogenous.reg_signal" in paths
        assert "exogenous.t_out" in paths

    def test_time_grid_rules(self):
        cfg = small_config()
        bad = dc.replace(cfg, time=TimeGrid(step_hours=1.0, horizon_steps=23))
        assert any(x.path == "time" for x in validate_config(bad))
        bad = dc.replace(cfg, time=TimeGrid(rt_step_seconds=7.0))
        assert any(x.path == "time.rt_step_seconds" for x in validate_config(bad))
        bad = dc.replace(cfg, time=TimeGrid(smpc_horizon_N=0))
        assert any(x.path == "time.smpc_horizon_N" for x in validate_config(bad))

    def test_soc_fractions_and_energy_limits(self):
        cfg = small_config()
        b = cfg.buildings[0]
        ess = EssParams(capacity_kwh=100.0, soc_min_frac=0.6, soc_boundary_frac=0.5,
                        e_min_kwh=10.0)
        paths = [x.path for x in
                 validate_config(dc.replace(cfg, buildings=(dc.replace(b, ess=ess),)))]
        assert "buildings[0].ess.soc_*_frac" in paths
        assert "buildings[0].ess.e_min_kwh" in paths

    def test_idempotent(self):
        cfg = _zone(small_config(), temp_min_c=27.0)
        assert validate_config(cfg) == validate_config(cfg)

    def test_require_valid_raises(self):
        with pytest.raises(InputError, match="temp_min_c"):
            require_valid(_zone(small_config(), temp_min_c=30.0))


class TestPv:
    def test_reference_point(self):
        assert pv_output(PvParams(1000.0, 1.0), 1000.0) == 1000.0

    def test_half_irradiance(self):
        assert pv_output(PvParams(1000.0, 0.9), 500.0) == pytest.approx(450.0, abs=1e-12)

    def test_zero(self):
        assert pv_output(PvParams(123.0, 0.7), 0.0) == 0.0

    def test_negative_rejected(self):
        with pytest.raises(InputError):
            pv_output(PvParams(1.0), -1.0)

    @given(st.floats(0.0, 2000.0), st.floats(1.0, 1e4), st.floats(0.01, 1.0))
    def test_homogeneous(self, g, pmax, eff):
        pv = PvParams(pmax, eff)
        assert pv_output(pv, 2 * g) == pytest.approx(2 * pv_output(pv, g), rel=1e-12, abs=1e-12)

    def test_vectorised(self):
        out = pv_output(PvParams(1000.0, 0.5), np.array([0.0, 1000.0]))
        np.testing.assert_allclose(out, [0.0, 500.0])


class TestComfort:
    def test_known_values(self):
        # frozen from exact rational evaluation of the quadratic
        assert _exact_sigma(18) == pytest.approx(0.40678, abs=1e-12)
        assert _exact_sigma(26) == pytest.approx(-0.19978, abs=1e-12)
        assert comfort_sigma(18.0) == pytest.approx(0.40678, abs=1e-12)
        assert comfort_sigma(26.0) == pytest.approx(-0.19978, abs=1e-12)

    def test_vertex(self):
        a, b, _ = COMFORT_COEFFS
        v = -b / (2 * a)
        assert v == pytest.approx(25.48758049678013, abs=1e-12)
        assert comfort_sigma(v) == pytest.approx(-0.20263417663293468, abs=1e-12)
        assert comfort_sigma(v) < comfort_sigma(v - 0.1)
        assert comfort_sigma(v) < comfort_sigma(v + 0.1)

    @given(st.floats(-10, 50), st.floats(-10, 50))
    def test_convex(self, t1, t2):
        mid = comfort_sigma((t1 + t2) / 2)
        assert mid <= (comfort_sigma(t1) + comfort_sigma(t2)) / 2 + 1e-9


class TestTypes:
    def test_etp_coefficients(self):
        z = HvacZoneParams(heat_capacity=2.0, thermal_resistance=2.0, cop=1.0, p_h_max_kw=10.0)
        assert z.etp_coefficients(1.0) == (0.75, 0.25, 0.5)

    def test_ess_defaults(self):
        e = EssParams(capacity_kwh=1000.0)
        assert (e.soc_min_kwh, e.soc_boundary_kwh, e.soc_max_kwh) == (200.0, 500.0, 800.0)
        assert (e.e_min_kwh, e.e_max_kwh) == (200.0, 800.0)

    def test_series_read_only(self):
        cfg = small_config()
        with pytest.raises(ValueError):
            cfg.buildings[0].demand_load[0] = 1.0

    def test_subset_and_lookup(self):
        cfg = bundled()
        assert cfg.building_ids == ["office", "research", "residential"]
        assert cfg.subset("research").building_ids == ["research"]
        with pytest.raises(InputError):
            cfg.building("lab")

    def test_time_grid_substeps(self):
        assert TimeGrid().substeps == 1800
        assert TimeGrid().rt_length == 43200

    @settings(max_examples=30)
    @given(st.floats(0.1, 10.0))
    def test_validation_pure(self, cr):
        cfg = _zone(small_config(), heat_capacity=cr, thermal_resistance=1.0)
        first = validate_config(cfg)
        assert validate_config(cfg) == first
        assert bool(first) == (cr <= 1.0)
