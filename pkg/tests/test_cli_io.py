import json

import numpy as np
import pytest

from cems.cli import compare_summaries, main
from cems.control import run_level1, simulate_day
from cems.datasets import bundled
from cems.errors import InputError, ResourceLimitError
from cems.io import (RunManifest, config_to_dict, export_config, load_config,
                     read_building_series, read_series, write_building_series,
                     write_series)
from cems.io.reports import (COMMITMENT_HEADER, figure_tables, read_commitment, read_summary,
                             read_table, read_trace, trace_rows, write_commitment,
                             write_trace)
from cems.scenario import ScenarioSet

from conftest import small_config

CLEAR = np.clip(800 * np.sin(np.pi * (np.arange(24) - 5) / 14), 0, None)


def _small(**kw):
    rng = np.random.default_rng(0)
    reg = np.clip(rng.normal(0, 0.4, 96), -1, 1).round(6)
    return small_config(demand=150.0, clear_sky=CLEAR, lambda_ffr=0.02, reg=reg,
                        scenarios=3, std=0.1, **kw)


@pytest.fixture()
def small_dir(tmp_path):
    return export_config(_small(), tmp_path / "cfg")


def _edit(path, fn):
    data = json.loads(path.read_text())
    fn(data)
    path.write_text(json.dumps(data))


class TestSeries:
    def test_round_trip(self, tmp_path):
        x = np.array([0.1, 1e-17, -3.0, 2.5e6])
        assert np.array_equal(read_series(write_series(tmp_path / "a.csv", x)), x)
        d = {"a": np.arange(3.0), "b": np.array([0.3, 0.1 + 0.2, 7.0])}
        back = read_building_series(write_building_series(tmp_path / "b.csv", d), ["a", "b"])
        assert all(np.array_equal(back[k], d[k]) for k in d)

    def test_errors_name_file_and_line(self, tmp_path):
        p = tmp_path / "s.csv"
        p.write_text("t,value\n0,1.0\n1,abc\n")
        with pytest.raises(InputError, match=r"s\.csv:3"):
            read_series(p)
        p.write_text("0,1.0\n1,2.0\n")
        with pytest.raises(InputError, match=r"s\.csv:1: expected header"):
            read_series(p)
        p.write_text("t,value\n0,1.0\n2,2.0\n")
        with pytest.raises(InputError):
            read_series(p)
        with pytest.raises(InputError, match="cannot read"):
            read_series(tmp_path / "missing.csv")


class TestConfig:
    def test_export_round_trip(self, tmp_path):
        cfg = bundled()
        loaded = load_config(export_config(cfg, tmp_path))
        assert config_to_dict(loaded) == config_to_dict(cfg)

    def test_inline_round_trip(self, tmp_path):
        cfg = _small()
        p = tmp_path / "inline.json"
        p.write_text(json.dumps(config_to_dict(cfg)))
        assert config_to_dict(load_config(p)) == config_to_dict(cfg)

    def test_unknown_and_missing_keys(self, small_dir):
        _edit(small_dir, lambda d: d["buildings"][0]["ess"].update(colour="red"))
        with pytest.raises(InputError, match=r"buildings\[0\]\.ess.*colour"):
            load_config(small_dir)
        _edit(small_dir, lambda d: (d["buildings"][0]["ess"].pop("colour"), d.pop("prices")))
        with pytest.raises(InputError, match="missing 'prices'"):
            load_config(small_dir)

    def test_json_syntax_error_has_line(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{\n  "time": {},\n  oops\n}\n')
        with pytest.raises(InputError, match=r"bad\.json:3"):
            load_config(p)


class TestCli:
    def test_validate(self, small_dir, capsys):
        assert main(["validate", "--dataset", "bundled"]) == 0
        assert main(["validate", "--config", str(small_dir)]) == 0
        assert "ok" in capsys.readouterr().out

    def test_missing_header(self, small_dir, capsys):
        path = small_dir.parent / "t_out.csv"
        path.write_text("\n".join(f"{t},28.0" for t in range(24)) + "\n")
        assert main(["level1", "--config", str(small_dir), "--out",
                     str(small_dir.parent / "o")]) == 1
        assert "t_out.csv" in capsys.readouterr().err

    def test_inverted_temperature_bounds(self, small_dir, capsys):
        _edit(small_dir, lambda d: d["buildings"][0]["zones"][0].update(
            temp_min_c=26.0, temp_max_c=18.0))
        assert main(["validate", "--config", str(small_dir)]) == 1
        assert main(["level1", "--config", str(small_dir), "--out",
                     str(small_dir.parent / "o")]) == 1
        assert "temp_min_c" in capsys.readouterr().err

    def test_missing_regulation_file(self, small_dir, capsys):
        reg = small_dir.parent / "reg_signal.csv"
        reg.unlink()
        assert main(["simulate", "--config", str(small_dir), "--out",
                     str(small_dir.parent / "o")]) == 1
        assert str(reg) in capsys.readouterr().err

    def test_infeasible_exit_code(self, small_dir, tmp_path, capsys):
        # a 60 C day with a tiny HVAC cannot keep the zone under 26 C
        def hot(d):
            d["buildings"][0]["zones"][0]["p_h_max_kw"] = 1.0
        _edit(small_dir, hot)
        write_series(small_dir.parent / "t_out.csv", np.full(24, 60.0))
        out = tmp_path / "inf"
        assert main(["level1", "--config", str(small_dir), "--out", str(out)]) == 2
        report = json.loads((out / "infeasibility.json").read_text())
        assert report["attribution"]
        assert "infeasible" in capsys.readouterr().err

    def test_resource_limit_exit_code(self, small_dir, tmp_path, monkeypatch, capsys):
        import cems.control.levels as levels

        def exhausted(*args, **kwargs):
            raise ResourceLimitError("branch-and-bound node limit 1 exceeded", -1.0, -2.0)
        monkeypatch.setattr(levels, "solve_milp", exhausted)
        assert main(["level1", "--config", str(small_dir), "--tol", "node_limit=1",
                     "--out", str(tmp_path / "r")]) == 3
        assert "node limit" in capsys.readouterr().err

    def test_bad_flags(self, tmp_path):
        assert main(["level1", "--tol", "gap", "--out", str(tmp_path / "a")]) == 1
        assert main(["level1", "--tol", "speed=1", "--out", str(tmp_path / "b")]) == 1
        assert main(["level1"]) == 1

    def test_level1_bundled(self, tmp_path, bundled_cfg):
        out = tmp_path / "l1"
        assert main(["level1", "--out", str(out), "--seed", "7"]) == 0
        lines = (out / "commitment.csv").read_text().splitlines()
        assert lines[0] == ",".join(COMMITMENT_HEADER)
        assert len(lines) - 1 == 24 * 3
        com = read_commitment(out / "commitment.csv", bundled_cfg)
        assert np.all(com.r_up >= 0)
        assert (out / "objective.txt").read_text().startswith("objective ")
        assert (out / "plan.csv").read_text().startswith("role,t,b,zone,s,value\n")
        assert main(["level1", "--out", str(out)]) == 1          # non-empty, no --force
        assert main(["level1", "--out", str(out), "--force"]) == 0

    def test_simulate_outputs_and_replay(self, small_dir, tmp_path, capsys):
        a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
        args = ["simulate", "--config", str(small_dir), "--seed", "5", "--scenarios", "2"]
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        for name in ("trace.csv", "summary.json", "commitment.csv", "fig3a_net_demand.csv",
                     "fig3b_ffr_capacity.csv", "fig4_ess.csv", "fig5_hvac.csv",
                     "fig6_smpc_levels.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes(), name
        man = RunManifest.load(a / "manifest.json")
        assert man.seed == 5 and man.scenarios == 2
        assert main(["simulate", "--manifest", str(a / "manifest.json"), "--out", str(c)]) == 0
        assert (a / "trace.csv").read_bytes() == (c / "trace.csv").read_bytes()
        summary = read_summary(a / "summary.json")
        header, data = read_table(a / "fig3a_net_demand.csv")
        assert header == ["t", "net_demand_kw", "cumulative_kwh"]
        np.testing.assert_allclose(data[:, 1], summary["net_demand_kw"])
        capsys.readouterr()

        assert main(["compare", str(a), str(b), "--out", str(tmp_path / "cmp")]) == 0
        table = json.loads((tmp_path / "cmp" / "compare.json").read_text())
        assert all(row["delta_pct"] == 0.0 for row in table["metrics"].values())
        assert "cost" in capsys.readouterr().out

    def test_manifest_command_mismatch(self, tmp_path):
        man = RunManifest("level1", str(tmp_path / "x"))
        path = man.save(tmp_path)
        assert main(["simulate", "--manifest", str(path)]) == 1
        with pytest.raises(InputError):
            RunManifest("level1", "x", mode="solo")
        with pytest.raises(InputError):
            RunManifest("simulate", "x", tolerances={"gap": 0})

    def test_export(self, tmp_path):
        assert main(["export", "--dataset", "zero-demand", "--out", str(tmp_path / "z")]) == 0
        assert load_config(tmp_path / "z" / "config.json").name == "zero-demand"


class TestCompare:
    def test_identical(self):
        s = {"cost_total": -10.0, "ffr_committed_kwh": 5.0, "comfort_integral": 1.0,
             "cumulative_net_demand_kwh": 0.0, "horizon_steps": 24, "buildings": ["a"]}
        out = compare_summaries(s, dict(s))
        assert {r["delta_pct"] for r in out["metrics"].values()} == {0.0}

    def test_relative_to_baseline(self):
        base = {"cost_total": -10.0, "ffr_committed_kwh": 5.0, "comfort_integral": 1.0,
                "cumulative_net_demand_kwh": 4.0, "horizon_steps": 24, "buildings": ["a"]}
        a = dict(base, cost_total=-11.0, ffr_committed_kwh=6.0)
        m = compare_summaries(a, base)["metrics"]
        assert m["cost"]["delta_pct"] == pytest.approx(-10.0)
        assert m["ffr_committed"]["delta_pct"] == pytest.approx(20.0)

    def test_schema_mismatch(self, tmp_path, capsys):
        s = {"cost_total": 1.0, "ffr_committed_kwh": 1.0, "comfort_integral": 1.0,
             "cumulative_net_demand_kwh": 1.0, "horizon_steps": 24, "buildings": ["a"]}
        with pytest.raises(InputError, match="horizon_steps"):
            compare_summaries(s, dict(s, horizon_steps=48))
        with pytest.raises(InputError, match="keys"):
            compare_summaries(s, {k: v for k, v in s.items() if k != "comfort_integral"})
        for name, data in (("a", s), ("b", dict(s, horizon_steps=48))):
            (tmp_path / name).mkdir()
            (tmp_path / name / "summary.json").write_text(json.dumps(data))
        assert main(["compare", str(tmp_path / "a"), str(tmp_path / "b")]) == 1
        assert "schema mismatch" in capsys.readouterr().err


@pytest.fixture(scope="module")
def small_trace():
    return simulate_day(_small(), seed=2)


class TestReports:
    def test_commitment_round_trip(self, tmp_path, small_trace):
        cfg = small_trace.cfg
        com = small_trace.plan.commitment
        back = read_commitment(write_commitment(tmp_path / "c.csv", cfg, com), cfg)
        for name in COMMITMENT_HEADER[3:]:
            assert np.array_equal(getattr(back, name), getattr(com, name)), name

    def test_commitment_errors(self, tmp_path, small_trace):
        cfg = small_trace.cfg
        p = write_commitment(tmp_path / "c.csv", cfg, small_trace.plan.commitment)
        lines = p.read_text().splitlines()
        p.write_text("\n".join(lines[:-1]) + "\n")
        with pytest.raises(InputError, match="rows, expected"):
            read_commitment(p, cfg)
        p.write_text("\n".join(lines + [lines[1]]) + "\n")
        with pytest.raises(InputError, match="duplicate"):
            read_commitment(p, cfg)

    def test_trace_round_trip(self, tmp_path, small_trace):
        rows = list(trace_rows(small_trace))
        table = read_trace(write_trace(tmp_path / "t.csv", rows))
        assert table.rows() == rows
        reg = table.select("reg", step=3)
        assert len(reg) == small_trace.cfg.time.substeps
        np.testing.assert_array_equal(reg, small_trace.records[3].level3.reg)

    def test_figure_tables(self, tmp_path, small_trace):
        tables = figure_tables(small_trace)
        assert set(tables) == {"fig3a_net_demand.csv", "fig3b_ffr_capacity.csv",
                               "fig4_ess.csv", "fig5_hvac.csv", "fig6_smpc_levels.csv"}
        header, rows = tables["fig3b_ffr_capacity.csv"]
        data = np.array(rows, dtype=float)
        i = header.index
        np.testing.assert_allclose(data[:, i("total_kw")], data[:, i("r_up_kw")]
                                   + data[:, i("r_dn_kw")], atol=1e-9)

    def test_level1_plan_matches_commitment(self, small_trace):
        cfg = small_trace.cfg
        again = run_level1(cfg, ScenarioSet(small_trace.plan.pv_scenario[None], [1.0]))
        assert again.objective_value == pytest.approx(small_trace.plan.objective_value)
