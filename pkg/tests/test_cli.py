"""Run-directory writers and the command-line workflow."""

import csv
import json
from pathlib import Path

import numpy as np
import pytest

from hyco.cli import main
from hyco.coefficients import HelmholtzParams, helmholtz_coeffs
from hyco.experiments import Dataset, preset
from hyco.io import read_history, read_summary, write_history, write_summary, write_dataset, write_fields


TINY_CONFIG = """\
kind = "helmholtz"

[scenario]
n = 12
fine_n = 24
M = 10

[train]
epochs = 4
H = 8
hidden_layers = [8, 8]

[meta]
dataset_seed = 3
"""


@pytest.fixture()
def tiny_config(tmp_path):
    p = tmp_path / "tiny.toml"
    p.write_text(TINY_CONFIG)
    return p


class TestHistoryIO:
    def test_round_trip_drops_empty_columns(self, tmp_path):
        rows = [
            {"epoch": 1, "L_syn": 0.5, "L_phy": None, "e_p": 1.0},
            {"epoch": 2, "L_syn": 0.25, "L_phy": None, "e_p": 0.5},
        ]
        path = tmp_path / "history.csv"
        cols = write_history(path, rows)
        assert cols == ["epoch", "L_syn", "e_p"]
        back = read_history(path)
        assert back == [
            {"epoch": 1, "L_syn": 0.5, "e_p": 1.0},
            {"epoch": 2, "L_syn": 0.25, "e_p": 0.5},
        ]

    def test_empty_history(self, tmp_path):
        path = tmp_path / "history.csv"
        write_history(path, [])
        assert path.read_text() == "epoch\n"

    def test_full_precision(self, tmp_path):
        val = 0.1234567890123456789
        path = tmp_path / "h.csv"
        write_history(path, [{"epoch": 1, "L_syn": val}])
        assert read_history(path)[0]["L_syn"] == val


class TestSummaryIO:
    def test_numpy_becomes_json(self, tmp_path):
        path = tmp_path / "s.json"
        write_summary(path, {"lam": np.array([1.0, 2.0]), "n": np.int64(3)})
        s = read_summary(path)
        assert s == {"lam": [1.0, 2.0], "n": 3}


class TestDatasetIO:
    def test_static_columns(self, tmp_path):
        ds = Dataset("helmholtz", np.array([[0.1, 0.2]]), np.array([[0.5]]), noise=0.0, seed=1)
        write_dataset(tmp_path, ds, {"preset": "x"})
        text = (tmp_path / "dataset.csv").read_text().splitlines()
        assert text[0] == "x,y,u,noisy"
        assert text[1].endswith(",0")
        side = json.loads((tmp_path / "dataset.json").read_text())
        assert side["kind"] == "helmholtz" and side["records"] == 1

    def test_dynamic_noisy_columns(self, tmp_path):
        ds = Dataset(
            "grayscott",
            np.array([[0.1, 0.2, 3.0]]),
            np.array([[0.5, 0.4]]),
            noise=0.2,
            seed=1,
        )
        write_dataset(tmp_path, ds, {})
        text = (tmp_path / "dataset.csv").read_text().splitlines()
        assert text[0] == "x,y,t,u,v,noisy"
        assert text[1].endswith(",1")


class TestFieldDumps:
    def test_helmholtz_fields(self, tmp_path):
        sc = preset("helmholtz_paper")[0]
        write_fields(tmp_path, sc, lam_final=sc.init_vector,
                     syn_predict=lambda p: np.zeros((len(p), 1)))
        fields = tmp_path / "fields"
        for name in ("kappa.csv", "kappa_true.csv", "solution.csv"):
            assert (fields / name).is_file()
        with (fields / "kappa_true.csv").open() as fh:
            rows = list(csv.DictReader(fh))
        assert set(rows[0]) == {"x", "y", "kappa", "eta"}
        r = rows[100]
        kap, eta = helmholtz_coeffs(float(r["x"]), float(r["y"]), sc.true_params)
        assert float(r["kappa"]) == pytest.approx(kap, abs=1e-12)
        assert float(r["eta"]) == pytest.approx(eta, abs=1e-12)
        with (fields / "solution.csv").open() as fh:
            srows = list(csv.DictReader(fh))
        assert set(srows[0]) == {"x", "y", "u_true", "u_phy", "u_syn"}
        assert all(float(r["u_syn"]) == 0.0 for r in srows[:5])

    def test_grayscott_snapshots(self, tmp_path):
        sc = preset("grayscott_desk")[0]
        write_fields(tmp_path, sc)  # truth only
        fields = tmp_path / "fields"
        assert not (fields / "kappa_true.csv").exists()
        snaps = sorted(fields.glob("solution_t*.csv"))
        assert len(snaps) == 5
        with snaps[0].open() as fh:
            rows = list(csv.DictReader(fh))
        assert set(rows[0]) == {"x", "y", "t", "u_true", "v_true"}
        assert all(float(r["t"]) == 0.0 for r in rows[:5])


class TestValidate:
    def test_preset_ok(self, capsys):
        assert main(["validate", "--preset", "helmholtz_paper"]) == 0
        assert "helmholtz" in capsys.readouterr().out

    def test_desk_alias(self):
        assert main(["validate", "--preset", "helmholtz_desk"]) == 0

    def test_unknown_preset(self, capsys):
        assert main(["validate", "--preset", "nope"]) == 1
        assert "nope" in capsys.readouterr().err

    def test_bad_field_named(self, tmp_path, capsys):
        bad = TINY_CONFIG.replace("H = 8", "H = 0")
        p = tmp_path / "bad.toml"
        p.write_text(bad)
        assert main(["validate", "--config", str(p)]) == 1
        assert "H" in capsys.readouterr().err

    def test_bad_region(self, tmp_path, capsys):
        bad = TINY_CONFIG.replace('M = 10', 'M = 10\nregion = "q7"')
        p = tmp_path / "bad.toml"
        p.write_text(bad)
        assert main(["validate", "--config", str(p)]) == 1
        assert "q7" in capsys.readouterr().err

    def test_parse_error_reported(self, tmp_path, capsys):
        p = tmp_path / "broken.toml"
        p.write_text("kind = [unclosed")
        assert main(["validate", "--config", str(p)]) == 1
        assert "parse error" in capsys.readouterr().err


class TestRun:
    def test_run_writes_everything(self, tiny_config, tmp_path, capsys):
        out = tmp_path / "run1"
        code = main(["run", "--config", str(tiny_config), "--out", str(out)])
        assert code == 0
        for name in ("history.csv", "summary.json", "dataset.csv", "dataset.json"):
            assert (out / name).is_file()
        assert (out / "fields" / "kappa.csv").is_file()
        assert (out / "fields" / "solution.csv").is_file()
        s = read_summary(out / "summary.json")
        assert s["method"] == "hyco"
        assert s["final"]["e_p"] is not None
        assert s["epochs_run"] == 4
        # the summary's e_s is literally the last history row's value
        hist = read_history(out / "history.csv")
        assert s["final"]["e_s"] == hist[-1]["e_s"]
        assert "e_p" in hist[-1]
        assert capsys.readouterr().out.startswith("method=hyco")

    def test_reruns_are_byte_identical(self, tiny_config, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        assert main(["run", "--config", str(tiny_config), "--out", str(a)]) == 0
        assert main(["run", "--config", str(tiny_config), "--out", str(b)]) == 0
        assert (a / "history.csv").read_bytes() == (b / "history.csv").read_bytes()
        assert (a / "dataset.csv").read_bytes() == (b / "dataset.csv").read_bytes()

    def test_nn_only_has_no_parameter_error(self, tiny_config, tmp_path):
        out = tmp_path / "nn"
        assert main(["run", "--config", str(tiny_config), "--method", "nn_only",
                     "--out", str(out)]) == 0
        text = (out / "summary.json").read_text()
        assert '"e_p"' not in text
        hist = read_history(out / "history.csv")
        assert "e_p" not in hist[-1]
        s = read_summary(out / "summary.json")
        assert s["final"]["e_s_synthetic"] is not None

    def test_physics_only_config_echo(self, tiny_config, tmp_path):
        out = tmp_path / "phys"
        assert main(["run", "--config", str(tiny_config), "--method", "physics_only",
                     "--out", str(out)]) == 0
        s = read_summary(out / "summary.json")
        assert s["config"]["syn_player"] is False
        assert s["final"]["e_s_physical"] is not None

    def test_pinn_runs(self, tmp_path):
        cfg = TINY_CONFIG.replace(
            "H = 8", "H = 8\ncolloc_interior = 30\ncolloc_boundary = 10"
        )
        p = tmp_path / "pinn.toml"
        p.write_text(cfg)
        out = tmp_path / "pinn"
        assert main(["run", "--config", str(p), "--method", "pinn", "--out", str(out)]) == 0
        s = read_summary(out / "summary.json")
        assert s["method"] == "pinn"
        assert s["final"]["e_p"] is not None

    def test_parallel_switches_to_jacobi(self, tiny_config, tmp_path):
        out = tmp_path / "par"
        assert main(["run", "--config", str(tiny_config), "--parallel",
                     "--out", str(out)]) == 0
        s = read_summary(out / "summary.json")
        assert s["config"]["update_order"] == "jacobi"
        assert s["config"]["parallel"] is True

    def test_seed_and_epoch_overrides(self, tiny_config, tmp_path):
        out = tmp_path / "ov"
        assert main(["run", "--config", str(tiny_config), "--seed", "9",
                     "--epochs", "2", "--out", str(out)]) == 0
        s = read_summary(out / "summary.json")
        assert s["seed"] == 9 and s["epochs_run"] == 2

    def test_bad_method_is_config_error(self, tiny_config, tmp_path, capsys):
        with pytest.raises(SystemExit):
            main(["run", "--config", str(tiny_config), "--method", "magic"])


class TestCompare:
    def test_table_schema_and_best_line(self, tiny_config, tmp_path, capsys):
        a = tmp_path / "a"
        b = tmp_path / "b"
        main(["run", "--config", str(tiny_config), "--out", str(a)])
        main(["run", "--config", str(tiny_config), "--method", "nn_only", "--out", str(b)])
        capsys.readouterr()
        table = tmp_path / "cmp.csv"
        assert main(["compare", str(a), str(b), "--out", str(table)]) == 0
        lines = table.read_text().splitlines()
        assert lines[0] == "method,region,time_s,e_p,e_s,e_d"
        assert len(lines) == 3
        nn_row = lines[2].split(",")
        assert nn_row[0] == "nn_only" and nn_row[3] == ""  # no parameter error
        assert "best e_s:" in capsys.readouterr().out

    def test_missing_run(self, tmp_path, capsys):
        assert main(["compare", str(tmp_path / "no_such"), str(tmp_path)]) == 2
        assert "missing run output" in capsys.readouterr().err

    def test_needs_two(self, tiny_config, tmp_path, capsys):
        a = tmp_path / "a"
        main(["run", "--config", str(tiny_config), "--out", str(a)])
        capsys.readouterr()
        assert main(["compare", str(a)]) == 1
