"""Command-line contract: manifests, CSV schema, reproducibility."""

import json
import math

import numpy as np
import pytest
from click.testing import CliRunner

from aql.cli import main
from aql.datasets import SpinHamiltonianSpec, ground_state
from aql.io import write_state
from aql.statevector import StateVector


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, args):
    result = runner.invoke(main, args, catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


def read_csv(path):
    lines = path.read_bytes().decode().split("\r\n")  # RFC 4180 row endings
    assert lines[0].startswith("# aql-csv v1 ")
    header = lines[1].split(",")
    rows = [line.split(",") for line in lines[2:] if line]
    return lines[0], header, rows


def product_plus_file(tmp_path, n):
    amps = np.full(1 << n, 2.0 ** (-n / 2), dtype=complex)
    path = tmp_path / f"plus{n}.qsv"
    write_state(path, StateVector(n, amps, copy=False, check=False))
    return path


class TestGenDataset:
    def test_ghz_entropy_in_manifest(self, runner, tmp_path):
        invoke(runner, ["gen-dataset", "--kind", "ghz", "-N", "10",
                        "--out-dir", str(tmp_path)])
        manifest = json.loads((tmp_path / "ghz_N10.manifest.json").read_text())
        assert abs(manifest["report"]["S"] - 10.0) < 1e-9
        assert (tmp_path / "ghz_N10.qsv").exists()

    def test_tfim_energy_matches_solver(self, runner, tmp_path):
        invoke(runner, ["gen-dataset", "--kind", "tfim", "-N", "6",
                        "-J", "1.0", "-g", "1.0", "--out-dir", str(tmp_path)])
        manifest = json.loads(
            (tmp_path / "tfim_N6_J1_g1.manifest.json").read_text())
        _, energy = ground_state(SpinHamiltonianSpec.tfim_chain(6, 1.0, 1.0))
        assert abs(manifest["report"]["energy"] - energy) < 1e-9

    def test_srqc_hash_reproducible(self, runner, tmp_path):
        for sub in ("a", "b"):
            invoke(runner, ["gen-dataset", "--kind", "srqc", "-N", "6",
                            "-W", "20", "--seed", "7",
                            "--out-dir", str(tmp_path / sub)])
        a = (tmp_path / "a" / "srqc_N6_W20_seed7.qsv").read_bytes()
        b = (tmp_path / "b" / "srqc_N6_W20_seed7.qsv").read_bytes()
        assert a == b
        ma = json.loads(
            (tmp_path / "a" / "srqc_N6_W20_seed7.manifest.json").read_text())
        mb = json.loads(
            (tmp_path / "b" / "srqc_N6_W20_seed7.manifest.json").read_text())
        assert ma["report"]["state_sha256"] == mb["report"]["state_sha256"]

    def test_manifest_fields(self, runner, tmp_path):
        invoke(runner, ["gen-dataset", "--kind", "ghz", "-N", "4",
                        "--out-dir", str(tmp_path)])
        manifest = json.loads((tmp_path / "ghz_N4.manifest.json").read_text())
        for field in ("command", "config", "seed", "version", "inputs",
                      "outputs", "wall_ms", "manifest_hash"):
            assert field in manifest
        assert manifest["version"]
        assert "ghz_N4.qsv" in manifest["outputs"]


class TestRun:
    def test_aqer_product_state_t0(self, runner, tmp_path):
        target = product_plus_file(tmp_path, 5)
        invoke(runner, ["run", "--method", "aqer", "--target", str(target),
                        "-T", "0", "--train-iters", "50",
                        "--out-dir", str(tmp_path)])
        doc = json.loads((tmp_path / "aqer_plus5_seed0.json").read_text())
        assert doc["infidelity_final"] < 1e-10
        assert doc["G"] == 0

    def test_aqer_ghz10_nine_blocks(self, runner, tmp_path):
        invoke(runner, ["gen-dataset", "--kind", "ghz", "-N", "10",
                        "--out-dir", str(tmp_path)])
        invoke(runner, ["run", "--method", "aqer",
                        "--target", str(tmp_path / "ghz_N10.qsv"),
                        "-T", "9", "--train-iters", "200",
                        "--out-dir", str(tmp_path)])
        doc = json.loads((tmp_path / "aqer_ghz_N10_seed0.json").read_text())
        assert doc["infidelity_final"] < 2.0 ** -12
        assert doc["G"] == 9

    def test_aqce_zero_state_one_unit(self, runner, tmp_path):
        path = tmp_path / "zero4.qsv"
        write_state(path, StateVector.zero(4))
        invoke(runner, ["run", "--method", "aqce", "--target", str(path),
                        "--units", "1", "--sweeps", "1",
                        "--out-dir", str(tmp_path)])
        doc = json.loads((tmp_path / "aqce_zero4_seed0.json").read_text())
        assert doc["infidelity_final"] < 1e-10

    def test_writes_loadable_circuit(self, runner, tmp_path):
        target = product_plus_file(tmp_path, 4)
        invoke(runner, ["run", "--method", "mps", "--target", str(target),
                        "--layers", "1", "--out-dir", str(tmp_path)])
        doc = json.loads((tmp_path / "mps_plus4_seed0.json").read_text())
        assert (tmp_path / doc["circuit_file"]).exists()
        manifest = json.loads(
            (tmp_path / "mps_plus4_seed0.manifest.json").read_text())
        assert "plus4.qsv" in manifest["inputs"]


class TestSweep:
    def sweep_args(self, target, out_dir, **over):
        args = {"t_grid": "1,2,3", "seeds": "0", "train_iters": "40"}
        args.update(over)
        return ["sweep", "--method", "aqer", "--targets", str(target),
                "--T-grid", args["t_grid"], "--seeds", args["seeds"],
                "--train-iters", args["train_iters"],
                "--out", "s.csv", "--out-dir", str(out_dir)]

    def test_row_per_cell(self, runner, tmp_path):
        target = product_plus_file(tmp_path, 4)
        invoke(runner, self.sweep_args(target, tmp_path))
        _, header, rows = read_csv(tmp_path / "s.csv")
        assert header == ["dataset", "method", "T", "G", "shots", "seed",
                          "S_final", "infidelity_initial", "infidelity_final",
                          "wall_ms"]
        assert len(rows) == 3

    def test_byte_identical_across_runs(self, runner, tmp_path):
        target = product_plus_file(tmp_path, 4)
        invoke(runner, self.sweep_args(target, tmp_path / "a"))
        invoke(runner, self.sweep_args(target, tmp_path / "b"))
        assert (tmp_path / "a" / "s.csv").read_bytes() == \
            (tmp_path / "b" / "s.csv").read_bytes()

    def test_header_hash_matches_manifest(self, runner, tmp_path):
        target = product_plus_file(tmp_path, 4)
        invoke(runner, self.sweep_args(target, tmp_path))
        comment, _, _ = read_csv(tmp_path / "s.csv")
        manifest = json.loads((tmp_path / "s.manifest.json").read_text())
        assert comment.endswith(f"manifest={manifest['manifest_hash']}")
        assert "plus4.qsv" in manifest["inputs"]

    def test_rows_sorted(self, runner, tmp_path):
        zz = product_plus_file(tmp_path, 4).rename(tmp_path / "zz.qsv")
        aa = product_plus_file(tmp_path, 4).rename(tmp_path / "aa.qsv")
        invoke(runner, ["sweep", "--method", "aqer",
                        "--targets", str(zz), "--targets", str(aa),
                        "--T-grid", "2,1", "--seeds", "1,0",
                        "--shots-grid", "200,0,100", "--train-iters", "20",
                        "--out", "s.csv", "--out-dir", str(tmp_path)])
        _, _, rows = read_csv(tmp_path / "s.csv")
        assert len(rows) == 2 * 2 * 3 * 2
        keys = [(r[0], r[1], int(r[2]), -1 if r[4] == "" else int(r[4]),
                 int(r[5])) for r in rows]
        assert keys == sorted(keys)

    def test_exact_mode_blank_shots(self, runner, tmp_path):
        target = product_plus_file(tmp_path, 4)
        invoke(runner, self.sweep_args(target, tmp_path, t_grid="1"))
        _, _, rows = read_csv(tmp_path / "s.csv")
        assert rows[0][4] == ""
        assert rows[0][9] == ""  # wall_ms empty unless --timing

    def test_budget_grid_converts(self, runner, tmp_path):
        target = product_plus_file(tmp_path, 4)
        invoke(runner, ["sweep", "--method", "mps", "--targets", str(target),
                        "--G-grid", "9,18", "--out", "s.csv",
                        "--out-dir", str(tmp_path)])
        _, _, rows = read_csv(tmp_path / "s.csv")
        assert [int(r[2]) for r in rows] == [1, 2]  # 3(N-1) per complex layer

    def test_grid_flags_exclusive(self, runner, tmp_path):
        target = product_plus_file(tmp_path, 4)
        result = runner.invoke(main, [
            "sweep", "--method", "aqer", "--targets", str(target),
            "--T-grid", "1", "--G-grid", "1", "--out-dir", str(tmp_path)])
        assert result.exit_code != 0
        result = runner.invoke(main, [
            "sweep", "--method", "mps", "--targets", str(target),
            "--T-grid", "1", "--shots-grid", "100",
            "--out-dir", str(tmp_path)])
        assert result.exit_code != 0


class TestTables:
    def test_bounds_zero_row(self, runner, tmp_path):
        invoke(runner, ["bounds-table", "--S-grid", "1.0,0,0.5", "-N", "10",
                        "--out-dir", str(tmp_path)])
        _, header, rows = read_csv(tmp_path / "bounds.csv")
        assert header == ["S", "f1", "f2"]
        assert rows[0] == ["0", "0", "0"]
        assert [float(r[0]) for r in rows] == [0.0, 0.5, 1.0]

    def test_noise_sweep_schema(self, runner, tmp_path):
        target = product_plus_file(tmp_path, 4)
        invoke(runner, ["noise-sweep", "--target", str(target),
                        "--T-grid", "1", "--p1", "1e-3", "--p2", "1e-2",
                        "--train-iters", "20", "--out-dir", str(tmp_path)])
        _, header, rows = read_csv(tmp_path / "noise.csv")
        assert header == ["T", "p1", "p2", "infidelity"]
        assert rows[0][:3] == ["1", "0.001", "0.01"]

    def test_phase_paramagnetic_plateau(self, runner, tmp_path):
        invoke(runner, ["phase", "-N", "4", "--gJ-grid", "2.0",
                        "--T-grid", "2", "--train-iters", "60",
                        "--out-dir", str(tmp_path)])
        _, header, rows = read_csv(tmp_path / "phase.csv")
        assert header == ["N", "gJ", "T", "m_exact", "m_loaded", "infidelity"]
        assert float(rows[0][3]) > 0.9  # <X> near 1 deep in the paramagnet


class TestIqp:
    def write_spec(self, tmp_path, angles):
        doc = {"num_qubits": 4, "edges": [[0, 1], [2, 3]], "angles": angles}
        path = tmp_path / "spec.json"
        path.write_text(json.dumps(doc))
        return path

    def test_exact_recovers_grid_instance(self, runner, tmp_path):
        spec = self.write_spec(tmp_path, [math.pi / 5, -2 * math.pi / 5])
        invoke(runner, ["iqp", "--mode", "exact", "--spec-file", str(spec),
                        "-K", "2", "--out-dir", str(tmp_path)])
        doc = json.loads((tmp_path / "iqp_exact_N4.json").read_text())
        assert doc["infidelity"] < 1e-9
        assert doc["E_recovered"] == doc["E_true"] == 2
        assert doc["iterations"] <= 2

    def test_shot_mode_family_guard(self, runner, tmp_path):
        spec = self.write_spec(tmp_path, [math.pi / 5, -2 * math.pi / 5])
        result = runner.invoke(main, [
            "iqp", "--mode", "shot", "--spec-file", str(spec),
            "--degree-bound", "1", "--out-dir", str(tmp_path)])
        assert result.exit_code != 0
        assert "pi/4" in result.output

    def test_shot_mode_recovers(self, runner, tmp_path):
        spec = self.write_spec(tmp_path, [math.pi / 4, math.pi / 4])
        invoke(runner, ["iqp", "--mode", "shot", "--spec-file", str(spec),
                        "--degree-bound", "1", "--seed", "5",
                        "--out-dir", str(tmp_path)])
        doc = json.loads((tmp_path / "iqp_shot_N4.json").read_text())
        assert doc["E_recovered"] == 2
        assert doc["infidelity"] < 1e-9
        assert doc["shots_used"] > 0


class TestVerifyAndConfig:
    def test_verify_subset_passes(self, runner):
        result = invoke(runner, ["verify", "--only",
                                 "ent-taylor,base-hec-structure"])
        assert "2/2 checks passed" in result.output

    def test_verify_unknown_name(self, runner):
        result = runner.invoke(main, ["verify", "--only", "no-such-check"])
        assert result.exit_code != 0

    def test_config_file_fills_defaults_flags_win(self, runner, tmp_path):
        target = product_plus_file(tmp_path, 4)
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"t": 3, "t3": 25}))
        invoke(runner, ["run", "--method", "aqer", "--target", str(target),
                        "-T", "1", "--config", str(cfg),
                        "--out-dir", str(tmp_path)])
        doc = json.loads((tmp_path / "aqer_plus4_seed0.json").read_text())
        assert doc["T"] == 1  # explicit flag beats the config file
        manifest = json.loads(
            (tmp_path / "aqer_plus4_seed0.manifest.json").read_text())
        assert manifest["config"]["t3"] == 25  # default filled from config
        assert "cfg.json" in manifest["inputs"]
