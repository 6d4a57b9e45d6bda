import io

import numpy as np
import pytest

from apriorilab import (
    BOUND_FIELDS,
    BerRecord,
    ExperimentConfig,
    Recipe,
    emit_bounds_csv,
    emit_csv,
    evaluate_bounds,
    figure_recipes,
    parse_csv,
    run_experiment,
    run_recipe,
)
from apriorilab.cli import main


class TestExperimentConfig:
    def test_read_mapping(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text(
            "# full line comment\n"
            "scenario = conv\n"
            "grid_db = 0, 1.5, 3  # trailing comment\n"
            "\n"
            "punctured = false\n"
        )
        mapping = ExperimentConfig.read_mapping(path)
        assert mapping == {"scenario": "conv", "grid_db": "0, 1.5, 3", "punctured": "false"}

    def test_read_mapping_rejects_bare_line(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("scenario conv\n")
        with pytest.raises(ValueError, match="key=value"):
            ExperimentConfig.read_mapping(path)

    def test_from_file(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text(
            "scenario = turbo\n"
            "grid_db = 1.0,2.0\n"
            "rhos = 0.9,0.7\n"
            "rho_ests = none\n"
            "k = 500\n"
            "max_bits = 1e6\n"
            "punctured = true\n"
            "master_seed = 99\n"
        )
        cfg = ExperimentConfig.from_file(path)
        assert cfg.scenario == "turbo"
        assert cfg.grid_db == (1.0, 2.0)
        assert cfg.rhos == (0.9, 0.7)
        assert cfg.rho_ests is None
        assert cfg.k == 500
        assert cfg.max_bits == 1e6
        assert cfg.master_seed == 99

    def test_from_mapping_rejects_unknown_key(self):
        with pytest.raises(ValueError, match="unknown config key"):
            ExperimentConfig.from_mapping({"scenario": "conv", "grid_db": "1", "snr": "3"})

    def test_from_mapping_rejects_bad_bool(self):
        with pytest.raises(ValueError, match="true or false"):
            ExperimentConfig.from_mapping(
                {"scenario": "conv", "grid_db": "1", "punctured": "yes"}
            )

    def test_validation(self):
        good = dict(scenario="conv", grid_db=(1.0,))
        ExperimentConfig(**good)
        with pytest.raises(ValueError):
            ExperimentConfig(**{**good, "scenario": "laser"})
        with pytest.raises(ValueError):
            ExperimentConfig(**{**good, "grid_db": ()})
        with pytest.raises(ValueError):
            ExperimentConfig(**{**good, "rhos": (0.9, 0.7), "rho_ests": (0.8,)})
        with pytest.raises(ValueError):
            ExperimentConfig(**{**good, "min_bit_errors": 10})
        with pytest.raises(ValueError):
            ExperimentConfig(**{**good, "code": "hamming"})
        with pytest.raises(ValueError):
            ExperimentConfig(**{**good, "k": 1000, "max_bits": 100})
        with pytest.raises(ValueError):
            ExperimentConfig(**{**good, "workers": 0})

    def test_points_order_and_pairing(self):
        cfg = ExperimentConfig(
            scenario="uncoded", grid_db=(0.0, 2.0), rhos=(0.9, 0.7), rho_ests=(0.8, 0.7)
        )
        pts = cfg.points()
        assert [p[0] for p in pts] == [0, 1, 2, 3]
        assert pts[0][1:] == (0.0, 0.9, 0.8)
        assert pts[1][1:] == (2.0, 0.9, 0.8)
        assert pts[2][1:] == (0.0, 0.7, 0.7)

    def test_effective_rho_ests_defaults_to_matched(self):
        cfg = ExperimentConfig(scenario="uncoded", grid_db=(1.0,), rhos=(0.9,))
        assert cfg.effective_rho_ests() == (0.9,)

    def test_list_inputs_coerced(self):
        cfg = ExperimentConfig(scenario="uncoded", grid_db=[1, 2], rhos=[0.9])
        assert cfg.grid_db == (1.0, 2.0)


def _tiny_uncoded(**over):
    base = dict(
        scenario="uncoded", grid_db=(2.0,), rhos=(0.9,), k=2000,
        min_bit_errors=80, max_bits=4e5, chunk_frames=8, master_seed=7,
    )
    base.update(over)
    return ExperimentConfig(**base)


class TestRunExperiment:
    def test_uncoded_point_statistics(self):
        rec = run_experiment(_tiny_uncoded())[0]
        assert rec.point_id == 0
        assert rec.converged
        assert rec.bit_errors >= 80
        assert rec.ber == pytest.approx(rec.bit_errors / rec.bits_simulated)
        assert rec.bits_simulated % 2000 == 0
        assert rec.seed == 7

    def test_budget_exhaustion_flagged(self):
        rec = run_experiment(_tiny_uncoded(grid_db=(9.0,), max_bits=64000))[0]
        assert not rec.converged
        assert rec.bits_simulated <= 64000

    def test_rerun_is_identical(self):
        a = run_experiment(_tiny_uncoded())
        b = run_experiment(_tiny_uncoded())
        assert a == b

    def test_workers_do_not_change_results(self):
        cfg1 = ExperimentConfig(
            scenario="conv", grid_db=(2.0, 3.0), rhos=(0.9,), k=150,
            min_bit_errors=60, max_bits=3e5, chunk_frames=16,
            master_seed=13, workers=1,
        )
        cfg2 = ExperimentConfig(
            scenario="conv", grid_db=(2.0, 3.0), rhos=(0.9,), k=150,
            min_bit_errors=60, max_bits=3e5, chunk_frames=16,
            master_seed=13, workers=2,
        )
        assert run_experiment(cfg1) == run_experiment(cfg2)

    def test_jscd_records_mean_estimate(self):
        cfg = ExperimentConfig(
            scenario="jscd", grid_db=(2.0,), rhos=(0.939,), k=200,
            min_bit_errors=50, max_bits=8000, chunk_frames=4, master_seed=5,
        )
        rec = run_experiment(cfg)[0]
        assert 0.5 <= rec.rho_est < 1.0
        assert rec.rho == 0.939

    def test_dsc_scenario_runs(self):
        cfg = ExperimentConfig(
            scenario="dsc", grid_db=(-2.0,), rhos=(0.939,), k=200,
            min_bit_errors=50, max_bits=8000, chunk_frames=4, master_seed=5,
        )
        rec = run_experiment(cfg)[0]
        assert rec.bit_errors > 0

    def test_bounds_scenario_rejected(self):
        with pytest.raises(ValueError, match="evaluate_bounds"):
            run_experiment(ExperimentConfig(scenario="bounds", grid_db=(1.0,)))


class TestCsv:
    def test_round_trip_exact(self):
        records = [
            BerRecord(0, 1 / 3, 0.9, 0.8, 10**12, 3, 1, 3e-12, True, 12345),
            BerRecord(1, -0.1, 0.7, 0.7, 999, 0, 0, 0.0, False, 2**31),
            BerRecord(2, 17.25, 0.95, 0.55, 4, 4, 2, 1.0, True, 0),
        ]
        buf = io.StringIO()
        emit_csv(records, buf)
        back = parse_csv(io.StringIO(buf.getvalue()))
        assert back == records

    def test_round_trip_via_path(self, tmp_path):
        records = run_experiment(_tiny_uncoded())
        path = tmp_path / "out.csv"
        emit_csv(records, path)
        assert parse_csv(path) == records

    def test_header_is_validated(self):
        buf = io.StringIO()
        emit_csv([BerRecord(0, 1.0, 0.9, 0.9, 10, 1, 1, 0.1, True, 1)], buf)
        mangled = buf.getvalue().replace("bit_errors", "bit_errs", 1)
        with pytest.raises(ValueError):
            parse_csv(io.StringIO(mangled))

    def test_bounds_csv_shape(self):
        cfg = ExperimentConfig(scenario="bounds", grid_db=(1.0, 2.0), rhos=(0.9,))
        rows = evaluate_bounds(cfg)
        assert len(rows) == 4  # uncoded + union rows per grid value
        assert {r["bound_name"] for r in rows} == {"uncoded", "conv_nonrecursive"}
        buf = io.StringIO()
        emit_bounds_csv(rows, buf)
        header = buf.getvalue().splitlines()[0]
        assert header == ",".join(BOUND_FIELDS)

    def test_bound_rows_ordered_like_kernels(self):
        rows = evaluate_bounds(ExperimentConfig(scenario="bounds", grid_db=(3.0,)))
        for row in rows:
            assert row["p_exact"] <= row["p_approx"] * 1.35
            assert row["p_approx"] <= row["p_chernoff"] * (1 + 1e-12)


class TestRecipes:
    def test_figure_catalogue(self):
        recipes = figure_recipes()
        assert set(recipes) == {f"fig{i}" for i in range(1, 10)}
        for name, recipe in recipes.items():
            assert recipe.name == name
            assert recipe.description
            assert recipe.simulations or recipe.bound_tables or recipe.analytic_tables

    def test_run_recipe_writes_files(self, tmp_path):
        recipe = Recipe(
            name="tiny",
            description="smoke recipe",
            simulations=(("sim.csv", _tiny_uncoded()),),
            bound_tables=(
                ("bounds.csv", ExperimentConfig(scenario="bounds", grid_db=(2.0,))),
            ),
            analytic_tables=(
                ("table.csv", ("a", "b"), lambda: [(1, 2.0), (3, 4.0)]),
            ),
        )
        written = run_recipe(recipe, tmp_path / "out", master_seed=21, workers=1)
        assert [p.name for p in written] == ["sim.csv", "bounds.csv", "table.csv"]
        for p in written:
            assert p.exists()
        rec = parse_csv(written[0])[0]
        assert rec.seed == 21  # master_seed override reaches the sim config
        table = (tmp_path / "out" / "table.csv").read_text().splitlines()
        assert table[0] == "a,b"
        assert table[1] == "1,2"


class TestCli:
    def test_spectrum_to_file(self, tmp_path, capsys):
        out = tmp_path / "spec.csv"
        assert main(["spectrum", "--code", "recursive", "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "w,d,beta"
        assert capsys.readouterr().err.startswith("# free distance 6")

    def test_bounds_to_file(self, tmp_path):
        out = tmp_path / "bounds.csv"
        rc = main(["bounds", "--grid", "1,2", "--rhos", "0.9", "--out", str(out)])
        assert rc == 0
        assert out.read_text().splitlines()[0] == ",".join(BOUND_FIELDS)

    def test_uncoded_sim_round_trip(self, tmp_path):
        out = tmp_path / "sim.csv"
        rc = main([
            "uncoded-sim", "--grid", "2", "--rhos", "0.9", "--k", "2000",
            "--min-bit-errors", "80", "--max-bits", "4e5", "--seed", "7",
            "--chunk-frames", "8", "--out", str(out),
        ])
        assert rc == 0
        assert parse_csv(out) == run_experiment(_tiny_uncoded())

    def test_config_file_with_flag_override(self, tmp_path):
        cfg_file = tmp_path / "exp.cfg"
        cfg_file.write_text(
            "grid_db = 9\nrhos = 0.9\nk = 2000\nmin_bit_errors = 80\n"
            "max_bits = 4e5\nchunk_frames = 8\nmaster_seed = 7\n"
        )
        out = tmp_path / "sim.csv"
        rc = main([
            "uncoded-sim", "--config", str(cfg_file), "--grid", "2", "--out", str(out),
        ])
        assert rc == 0
        # the flag grid wins over the file grid
        assert parse_csv(out) == run_experiment(_tiny_uncoded())

    def test_recipe_list(self, capsys):
        assert main(["recipe", "list"]) == 0
        out = capsys.readouterr().out
        assert "fig1:" in out and "fig9:" in out

    def test_unknown_recipe_fails(self, capsys):
        assert main(["recipe", "fig99"]) == 1
        assert "unknown recipe" in capsys.readouterr().err

    def test_invalid_config_reports_error(self, capsys):
        rc = main(["uncoded-sim", "--grid", "2", "--min-bit-errors", "10"])
        assert rc == 1
        assert "error:" in capsys.readouterr().err

    def test_jscd_baseline_flag(self, tmp_path):
        out = tmp_path / "dsc.csv"
        rc = main([
            "jscd-sim", "--baseline", "--grid", "-2", "--rhos", "0.939", "--k", "200",
            "--min-bit-errors", "50", "--max-bits", "8000", "--chunk-frames", "4",
            "--seed", "5", "--out", str(out),
        ])
        assert rc == 0
        rec = parse_csv(out)[0]
        assert rec.bit_errors > 0
