import csv
import json
import math

import pytest

from uavdeploy.cli import ConfigError, ExperimentConfig, load_config, main


def run_cli(args):
    return main(args)


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# seed=") and "version=" in lines[0]
    return lines[0], list(csv.DictReader(lines[1:]))


def write_config(tmp_path, record):
    p = tmp_path / "config.json"
    p.write_text(json.dumps(record))
    return str(p)


class TestConfig:
    def test_unknown_field_is_named(self):
        with pytest.raises(ConfigError, match="altitude_km"):
            ExperimentConfig.from_dict({"altitude_km": 0.1})

    def test_both_densities_rejected(self):
        with pytest.raises(ConfigError, match="density"):
            ExperimentConfig.from_dict({"density_per_m": 1e-3,
                                        "density_per_m2": 1e-6})

    def test_bad_values_are_named(self):
        with pytest.raises(ConfigError, match="tx_power_mw"):
            ExperimentConfig.from_dict({"tx_power_mw": -1.0})
        with pytest.raises(ConfigError, match="beta"):
            ExperimentConfig.from_dict({"beta": 1.5})
        with pytest.raises(ConfigError, match="scheme"):
            ExperimentConfig.from_dict({"scheme": "telepathy"})
        with pytest.raises(ConfigError, match="rho_list"):
            ExperimentConfig.from_dict({"rho_list": [0.5, -0.1]})

    def test_round_trip_is_idempotent(self):
        record = {"tx_power_mw": 20.0, "density_per_m2": 2e-6,
                  "gamma_th_db": 3.0, "scheme": "majority_vote", "beta": 0.25,
                  "mu_list": [1.0, 4.0]}
        once = ExperimentConfig.from_dict(record)
        twice = ExperimentConfig.from_dict(once.to_dict())
        assert once == twice
        assert twice.to_dict() == once.to_dict()

    def test_unit_conversions(self):
        cfg = ExperimentConfig()
        params = cfg.system_params()
        assert params.transmit_power == pytest.approx(0.01)
        assert params.noise_power == pytest.approx(1e-14)
        assert params.ref_gain_theta == pytest.approx(10.0 ** -4.7)
        assert params.link_budget_a == pytest.approx(19952623.149688788)
        cfg = ExperimentConfig.from_dict({"gamma_th_db": 3.0})
        assert cfg.gamma_th() == pytest.approx(10.0 ** 0.3)

    def test_density_field_picks_dimension(self):
        line = ExperimentConfig.from_dict({"density_per_m": 1e-3}).cell()
        square = ExperimentConfig.from_dict({"density_per_m2": 1e-6}).cell()
        assert line.n_sectors == 2
        assert square.n_sectors == 4
        assert line.mean_load_mu == pytest.approx(2.0)
        assert square.mean_load_mu == pytest.approx(4.0)

    def test_bad_json_reported(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{nope")
        with pytest.raises(ConfigError, match="JSON"):
            load_config(str(p))


class TestAnalytic:
    def test_near_empty_beta_star(self, tmp_path):
        cfg = write_config(tmp_path, {"mu_list": [1e-4]})
        out = tmp_path / "o.csv"
        assert run_cli(["analytic", "beta_star_throughput_1d", "--config", cfg,
                        "--out", str(out)]) == 0
        _, rows = read_csv(out)
        assert float(rows[0]["beta_star"]) == pytest.approx(0.5, abs=1e-3)

    def test_centered_success_equals_coverage_ratio(self, tmp_path):
        cfg = write_config(tmp_path, {"beta": 0.0, "rho_list": [0.4],
                                      "mu_list": [2.0]})
        out = tmp_path / "o.csv"
        assert run_cli(["analytic", "success_1d", "--config", cfg,
                        "--out", str(out)]) == 0
        _, rows = read_csv(out)
        assert float(rows[0]["success_prob"]) == pytest.approx(0.4, abs=1e-12)

    def test_low_load_success_edge_2d(self, tmp_path):
        cfg = write_config(tmp_path, {"rho_list": [1.0]})
        out = tmp_path / "o.csv"
        assert run_cli(["analytic", "beta_star_success_2d_lowload",
                        "--config", cfg, "--out", str(out)]) == 0
        _, rows = read_csv(out)
        assert float(rows[0]["beta_lo"]) == pytest.approx(1 - 1 / math.sqrt(2),
                                                          abs=1e-5)

    def test_unknown_quantity_fails(self, capsys):
        assert run_cli(["analytic", "warp_factor"]) == 2
        assert "unknown quantity" in capsys.readouterr().err

    def test_metadata_line_carries_seed(self, tmp_path):
        out = tmp_path / "o.csv"
        assert run_cli(["analytic", "displacement_probs_1d", "--seed", "77",
                        "--out", str(out)]) == 0
        meta, _ = read_csv(out)
        assert "seed=77" in meta


class TestSimulate:
    def test_non_adaptive_equals_zero_displacement(self, tmp_path):
        outs = []
        for scheme, extra in (("non_adaptive", {}),
                              ("majority_vote", {"beta": 0.0})):
            cfg = write_config(tmp_path, {"scheme": scheme,
                                          "density_per_m": 1e-3, **extra})
            out = tmp_path / f"{scheme}.json"
            assert run_cli(["simulate", "--config", cfg, "--seed", "3",
                            "--realizations", "20000",
                            "--out", str(out)]) == 0
            outs.append(json.loads(out.read_text()))
        assert outs[0]["mean"] == outs[1]["mean"]
        assert outs[0]["std_error"] == outs[1]["std_error"]
        assert outs[0]["n_kept"] == outs[1]["n_kept"]

    def test_thread_flag_does_not_change_results(self, tmp_path):
        cfg = write_config(tmp_path, {"scheme": "majority_vote", "beta": 0.3,
                                      "density_per_m": 1e-3})
        results = []
        for threads in ("1", "4"):
            out = tmp_path / f"t{threads}.json"
            assert run_cli(["simulate", "--config", cfg, "--seed", "11",
                            "--realizations", "40000", "--threads", threads,
                            "--out", str(out)]) == 0
            results.append(json.loads(out.read_text()))
        assert results[0]["mean"] == results[1]["mean"]
        assert results[0]["std_error"] == results[1]["std_error"]

    def test_summary_fields_and_config_echo(self, tmp_path):
        record = {"scheme": "exact_number", "density_per_m": 5e-4}
        cfg = write_config(tmp_path, record)
        out = tmp_path / "o.json"
        assert run_cli(["simulate", "--config", cfg, "--seed", "2",
                        "--realizations", "5000", "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        for key in ("mean", "std_error", "n_kept", "n_total", "seed",
                    "config"):
            assert key in payload
        assert payload["n_total"] == 5000
        echoed = ExperimentConfig.from_dict(payload["config"])
        assert echoed == ExperimentConfig.from_dict(record)

    def test_multi_uav_route(self, tmp_path):
        cfg = write_config(tmp_path, {"beta": 0.3, "n_side": 2,
                                      "density_per_m": 1e-3})
        out = tmp_path / "o.json"
        assert run_cli(["simulate", "--config", cfg, "--seed", "4",
                        "--realizations", "5000", "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        assert payload["scheme"] == "multi_uav(n_side=2)"

    def test_missing_scheme_is_config_error(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"density_per_m": 1e-3})
        assert run_cli(["simulate", "--config", cfg]) == 2
        assert "scheme" in capsys.readouterr().err

    def test_success_needs_threshold(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"scheme": "majority_vote", "beta": 0.2,
                                      "objective": "success",
                                      "density_per_m": 1e-3})
        assert run_cli(["simulate", "--config", cfg]) == 2
        assert "gamma_th_db" in capsys.readouterr().err


class TestOptimize:
    def test_throughput_1d(self, tmp_path):
        cfg = write_config(tmp_path, {"density_per_m": 1e-3})
        out = tmp_path / "o.json"
        assert run_cli(["optimize", "throughput", "--config", cfg,
                        "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        assert payload["beta_star"] == pytest.approx(0.46734, abs=1e-4)

    def test_success_interval_2d(self, tmp_path):
        # gamma chosen so rho = 0.3 R: the optimum is a flat interval
        a, h = 19952623.149688788, 100.0
        gamma_db = 10 * math.log10(a / (300.0 ** 2 + h * h))
        cfg = write_config(tmp_path, {"density_per_m2": 1e-6,
                                      "gamma_th_db": gamma_db})
        out = tmp_path / "o.json"
        assert run_cli(["optimize", "success", "--config", cfg,
                        "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        assert payload["rho_ratio"] == pytest.approx(0.3, abs=1e-9)
        assert payload["flat"] is True
        assert payload["beta_lo"] == pytest.approx(0.3, abs=1e-9)
        assert payload["beta_hi"] == pytest.approx(0.7, abs=1e-9)


class TestFigure:
    def test_unknown_name(self, capsys):
        assert run_cli(["figure", "fig99"]) == 2
        assert "unknown figure name" in capsys.readouterr().err

    def test_flat_interval_marked(self, tmp_path):
        out = tmp_path / "o.csv"
        assert run_cli(["figure", "fig7a", "--out", str(out)]) == 0
        _, rows = read_csv(out)
        for row in rows:
            flat = int(row["flat_interval"])
            if float(row["rho_ratio"]) < 0.5:
                assert flat == 1
            assert (float(row["beta_hi"]) > float(row["beta_lo"])) == bool(flat)

    def test_multi_uav_dataset(self, tmp_path):
        cfg = write_config(tmp_path, {"mu_list": [2.0], "n_side": 3})
        out = tmp_path / "o.csv"
        assert run_cli(["figure", "fig8", "--config", cfg, "--seed", "5",
                        "--realizations", "4000", "--out", str(out)]) == 0
        _, rows = read_csv(out)
        assert {r["n_side"] for r in rows} == {"3"}
        stars = {r["single_cell_beta_star"] for r in rows}
        assert len(stars) == 1
        assert float(stars.pop()) == pytest.approx(0.46734, abs=1e-4)

    def test_scheme_comparison_dataset(self, tmp_path):
        cfg = write_config(tmp_path, {"mu_list": [1.0]})
        out = tmp_path / "o.csv"
        assert run_cli(["figure", "fig4b", "--config", cfg, "--seed", "5",
                        "--realizations", "20000", "--out", str(out)]) == 0
        _, rows = read_csv(out)
        means = {r["scheme"]: float(r["mean"]) for r in rows}
        assert set(means) == {"non_adaptive", "majority_vote", "exact_number",
                              "perfect_knowledge"}
        assert means["perfect_knowledge"] >= means["non_adaptive"]


class TestValidate:
    def test_fast_battery_passes(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        assert run_cli(["validate", "--seed", "2", "--out", str(out)]) == 0
        text = capsys.readouterr().out
        passes = [l for l in text.splitlines() if l.startswith("PASS")]
        assert len(passes) >= 15
        assert "FAIL" not in text
        report = json.loads(out.read_text())
        assert all(c["passed"] for c in report["checks"])
        assert {"name", "deviation", "tolerance", "passed"} <= set(
            report["checks"][0])
