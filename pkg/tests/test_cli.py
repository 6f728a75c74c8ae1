"""End-to-end checks of the command line entry point."""

import json
import re

import pytest

from magicflow.cli import main


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestExitCodes:
    def test_missing_required_flag_is_usage_error(self, capsys):
        code, _, err = run_cli(["simulate", "--theta", "0.5"], capsys)
        assert code == 1
        assert "--n" in err

    def test_bad_dial_value(self, capsys):
        code, _, err = run_cli(
            ["simulate", "--n", "4", "--theta", "2.0", "--steps", "2", "--traj", "2"],
            capsys)
        assert code == 1
        assert err.startswith("error:")

    def test_qubit_cap_is_exit_two(self, capsys):
        code, _, err = run_cli(
            ["simulate", "--n", "15", "--theta", "0.5", "--steps", "1", "--traj", "1"],
            capsys)
        assert code == 2
        assert "MAGICFLOW_MAX_QUBITS" in err

    def test_help_exits_zero(self, capsys):
        assert run_cli(["--help"], capsys)[0] == 0

    def test_version(self, capsys):
        code, out, _ = run_cli(["--version"], capsys)
        assert code == 0
        assert re.fullmatch(r"\d+\.\d+\.\d+", out.strip())


class TestSimulate:
    ARGS = ["simulate", "--n", "4", "--theta", "0.5", "--steps", "16",
            "--traj", "6", "--seed", "7", "--schedule", "log:8"]

    def test_stdout_bundle(self, capsys):
        code, out, _ = run_cli(self.ARGS, capsys)
        assert code == 0
        bundle = json.loads(out)
        assert bundle["config"]["n"] == 4
        assert bundle["checkpoints"]["step"][0] == 0
        assert bundle["checkpoints"]["step"][-1] == 16
        assert set(bundle["checkpoints"]["nullity"]) == {"mean", "std", "stderr"}
        assert bundle["provenance"]["master_seed"] == 7

    def test_rerun_is_identical_up_to_wall_time(self, capsys):
        def masked():
            _, out, _ = run_cli(self.ARGS, capsys)
            bundle = json.loads(out)
            bundle["provenance"].pop("wall_time_s")
            return json.dumps(bundle, sort_keys=True)

        assert masked() == masked()

    def test_out_writes_json_and_csv(self, tmp_path, capsys):
        out = tmp_path / "run.json"
        code, text, _ = run_cli(self.ARGS + ["--out", str(out)], capsys)
        assert code == 0
        assert f"wrote {out}" in text
        bundle = json.loads(out.read_text())
        csv_lines = (tmp_path / "run.csv").read_text().splitlines()
        assert csv_lines[0].startswith("# config: {")
        assert csv_lines[1] == "observable,step,mean,std,stderr"
        # one row per observable per checkpoint
        n_checkpoints = len(bundle["checkpoints"]["step"])
        assert len(csv_lines) == 2 + 2 * n_checkpoints
        first = csv_lines[2].split(",")
        assert first[0] == "nullity" and first[1] == "0"
        assert float(first[2]) == bundle["checkpoints"]["nullity"]["mean"][0]

    def test_extra_sre_order(self, capsys):
        args = self.ARGS[:-2] + ["--observables", "nullity,sre_3", "--steps", "4"]
        code, out, _ = run_cli(args, capsys)
        assert code == 0
        bundle = json.loads(out)
        assert "sre_3" in bundle["checkpoints"]
        assert "sre2" not in bundle["checkpoints"]

    def test_bad_observable_token(self, capsys):
        args = ["simulate", "--n", "3", "--theta", "0.1", "--observables", "parity"]
        code, _, err = run_cli(args, capsys)
        assert code == 1
        assert "parity" in err

    def test_plot_renders_svg_with_config(self, tmp_path, capsys):
        args = self.ARGS + ["--plot", str(tmp_path)]
        code, out, _ = run_cli(args, capsys)
        assert code == 0
        svg = (tmp_path / "run_nullity.svg").read_text()
        assert svg.lstrip().startswith("<?xml")
        assert '"theta_m": 0.5' in svg


class TestModel:
    def test_analytic_starts_at_full_nullity(self, capsys):
        code, out, _ = run_cli(["model", "--n", "9", "--analytic"], capsys)
        assert code == 0
        assert "nu(0) = 9," in out

    def test_magic_basis_tail(self, capsys):
        code, out, _ = run_cli(["model", "--n", "10", "--magic-basis"], capsys)
        assert code == 0
        value = float(re.search(r"tail mean nu: ([0-9.]+)", out).group(1))
        assert value == pytest.approx(10.0 - 1.4587, abs=0.01)

    def test_steady_offset(self, capsys):
        code, out, _ = run_cli(["model", "--n", "6", "--steady"], capsys)
        assert code == 0
        offset = float(re.search(r"steady offset: (-[0-9.]+)", out).group(1))
        assert offset == pytest.approx(-1.4587, abs=0.001)

    def test_chain_csv(self, tmp_path, capsys):
        out = tmp_path / "chain.csv"
        code, _, _ = run_cli(
            ["model", "--n", "5", "--chain", "--steps", "50", "--out", str(out)],
            capsys)
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[1].split(",")[0] == "t"
        assert len(lines) == 2 + 51
        first_nu = float(lines[2].split(",")[1])
        assert first_nu == 5.0

    def test_mode_is_required(self, capsys):
        code, _, err = run_cli(["model", "--n", "4"], capsys)
        assert code == 1
        assert "required" in err


class TestReproduce:
    def test_fit_recovery_preset(self, tmp_path, capsys):
        code, out, _ = run_cli(
            ["reproduce", "--fig", "app_fits", "--outdir", str(tmp_path)], capsys)
        assert code == 0
        assert (tmp_path / "app_fits.svg").exists()
        assert (tmp_path / "app_fits.csv").exists()
        assert "a_f" in out

    def test_unknown_figure(self, capsys):
        code, _, err = run_cli(["reproduce", "--fig", "fig99"], capsys)
        assert code == 1
        assert "fig99" in err


class TestSelftest:
    def test_all_suites_pass(self, capsys):
        code, out, _ = run_cli(["selftest"], capsys)
        assert code == 0
        assert "all suites passed" in out
        assert out.count("PASS") == 5
        assert "FAIL" not in out

    def test_corrupt_hook_fails_named_suite(self, capsys):
        code, out, _ = run_cli(["selftest", "--corrupt", "sre_additivity"], capsys)
        assert code == 3
        line = next(l for l in out.splitlines() if l.startswith("sre_additivity"))
        assert "FAIL" in line
        assert "1 suite(s) failed" in out
