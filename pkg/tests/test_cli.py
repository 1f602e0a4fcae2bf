import numpy as np
import pytest

from scgarch import io
from scgarch.cli import main
from scgarch.experiments import BenchmarkResult, BenchmarkRow
from scgarch.model import TimeSeriesPanel


def run(*argv):
    return main([str(a) for a in argv])


def write_iid_panel(path, n, p, seed=0, scale=1.0):
    rng = np.random.default_rng(seed)
    io.write_panel(path, TimeSeriesPanel(scale * rng.standard_normal((n, p))))


class TestSimulate:
    def test_sim2_default_shape(self, tmp_path):
        assert run("simulate", "sim2", "--out-dir", tmp_path) == 0
        panel = io.read_panel(tmp_path / "panel.csv")
        assert panel.values.shape == (1024, 3)
        truth = io.read_cov_path(tmp_path / "truth_cov.csv")
        assert truth.sigmas.shape == (1024, 3, 3)
        assert (tmp_path / "config.echo").exists()

    def test_sim1_row_count(self, tmp_path):
        assert run("simulate", "sim1", "--n", 100, "--out-dir", tmp_path) == 0
        lines = (tmp_path / "panel.csv").read_text().strip().splitlines()
        assert lines[0] == "y,x,phi_true"
        assert len(lines) == 101

    def test_negative_seed_rejected(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run("simulate", "sim2", "--seed", -1, "--out-dir", tmp_path)
        assert exc.value.code == 2

    def test_identical_seed_gives_identical_bytes(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        run("simulate", "sim2", "--n", 64, "--seed", 7, "--out-dir", a)
        run("simulate", "sim2", "--n", 64, "--seed", 7, "--out-dir", b)
        assert (a / "panel.csv").read_bytes() == (b / "panel.csv").read_bytes()
        assert (a / "truth_cov.csv").read_bytes() == (b / "truth_cov.csv").read_bytes()


class TestFit:
    def test_p1_correlation_path_is_ones(self, tmp_path):
        panel_path = tmp_path / "panel.csv"
        write_iid_panel(panel_path, 120, 1, seed=3)
        out = tmp_path / "out"
        assert run("fit", panel_path, "--out-dir", out) == 0
        corr = io.read_cov_path(out / "corr_path.csv")
        np.testing.assert_array_equal(corr.sigmas, np.ones((120, 1, 1)))
        for name in ("cov_path.csv", "coeff_path.csv", "garch_params.csv",
                     "ordering.txt", "summary.txt", "config.echo"):
            assert (out / name).exists()

    def test_cgarch_coefficients_constant(self, tmp_path):
        panel_path = tmp_path / "panel.csv"
        write_iid_panel(panel_path, 150, 2, seed=5)
        out = tmp_path / "out"
        assert run("fit", panel_path, "--model", "cgarch", "--out-dir", out) == 0
        rows = (out / "coeff_path.csv").read_text().strip().splitlines()[1:]
        phis = {row.split(",")[3] for row in rows}
        assert len(phis) == 1  # one (j,k) pair, identical at every t
        summary = (out / "summary.txt").read_text()
        assert "model=cgarch" in summary and "bic=" in summary

    def test_bic_ordering_writes_permutation(self, tmp_path):
        panel_path = tmp_path / "panel.csv"
        write_iid_panel(panel_path, 150, 2, seed=8)
        out = tmp_path / "out"
        assert run("fit", panel_path, "--ordering", "bic-exhaustive",
                   "--out-dir", out) == 0
        first = (out / "ordering.txt").read_text().splitlines()[0]
        assert sorted(first.split()) == ["1", "2"]

    def test_missing_input_is_exit_2(self, tmp_path):
        assert run("fit", tmp_path / "nope.csv", "--out-dir", tmp_path) == 2

    def test_malformed_panel_is_exit_2(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1.0,x\n")
        assert run("fit", bad, "--out-dir", tmp_path) == 2

    def test_numerical_failure_is_exit_3(self, tmp_path):
        # perfectly collinear columns: the static factorization must fail
        rng = np.random.default_rng(4)
        col = rng.standard_normal(100)
        io.write_panel(tmp_path / "panel.csv",
                       TimeSeriesPanel(np.column_stack([col, col]), ["a", "b"]))
        assert run("fit", tmp_path / "panel.csv", "--model", "cgarch",
                   "--out-dir", tmp_path) == 3

    def test_even_block_size_is_exit_2(self, tmp_path):
        run("simulate", "sim2", "--n", 64, "--out-dir", tmp_path)
        fitdir = tmp_path / "fit"
        run("fit", tmp_path / "panel.csv", "--out-dir", fitdir)
        assert run("evaluate", fitdir / "cov_path.csv", "--moving-block",
                   "--panel", tmp_path / "panel.csv", "--block-size", 10,
                   "--out-dir", tmp_path) == 2


class TestEvaluate:
    def test_perfect_estimate_scores_zero(self, tmp_path, capsys):
        run("simulate", "sim2", "--n", 64, "--out-dir", tmp_path)
        truth = tmp_path / "truth_cov.csv"
        out = tmp_path / "eval"
        assert run("evaluate", truth, "--truth", truth, "--out-dir", out) == 0
        printed = capsys.readouterr().out
        assert "MAE 0" in printed and "MSE 0" in printed
        last = (out / "eval.csv").read_text().strip().splitlines()[-1]
        assert last == "mean,0,0"

    def test_moving_block_truth_flags_q(self, tmp_path):
        run("simulate", "sim2", "--n", 128, "--out-dir", tmp_path)
        fit_out = tmp_path / "fit"
        run("fit", tmp_path / "panel.csv", "--out-dir", fit_out)
        out = tmp_path / "eval"
        code = run("evaluate", fit_out / "cov_path.csv", "--moving-block",
                   "--panel", tmp_path / "panel.csv", "--block-size", 21,
                   "--scale", "correlation", "--out-dir", out)
        assert code == 0
        header = (out / "eval.csv").read_text().splitlines()[0]
        assert "moving-block(q=21)" in header
        report = (out / "eval.csv").read_text().strip().splitlines()[-1]
        mae, mse = (float(v) for v in report.split(",")[1:])
        assert mae > 0 and mse > 0 and np.isfinite(mae) and np.isfinite(mse)

    def test_requires_exactly_one_truth_source(self, tmp_path):
        run("simulate", "sim2", "--n", 64, "--out-dir", tmp_path)
        truth = tmp_path / "truth_cov.csv"
        assert run("evaluate", truth, "--out-dir", tmp_path) == 2
        assert run("evaluate", truth, "--truth", truth, "--moving-block",
                   "--panel", tmp_path / "panel.csv", "--block-size", 21,
                   "--out-dir", tmp_path) == 2


class TestSelectBlock:
    def test_writes_diagnostics(self, tmp_path):
        panel_path = tmp_path / "panel.csv"
        write_iid_panel(panel_path, 400, 2, seed=2)
        out = tmp_path / "out"
        assert run("select-block", panel_path, "--candidates", 5, 11, 21, 41,
                   "--out-dir", out) == 0
        lines = (out / "block_selection.csv").read_text().strip().splitlines()
        assert lines[0] == "q,mae,mse,mae_diff,mse_diff,selected"
        assert len(lines) == 5
        assert sum(row.endswith("true") for row in lines[1:]) == 1


class TestBenchmark:
    def test_single_replication_deterministic(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert run("benchmark", "--replications", 1, "--n", 256,
                       "--seed", 3, "--out-dir", out) == 0
        assert (a / "benchmark.csv").read_bytes() == (b / "benchmark.csv").read_bytes()
        lines = (a / "benchmark.csv").read_text().strip().splitlines()
        assert lines[0] == "model,scale,mae,mse,replications"
        assert len(lines) == 5  # two models x two scales
        assert (a / "failures.csv").read_text().strip() == "replication,model,error"

    def test_all_failed_property(self):
        rows = [BenchmarkRow("scgarch", "covariance", float("nan"), float("nan"), 0)]
        result = BenchmarkResult(rows, [(0, "scgarch", "boom")], 1)
        assert result.all_failed


class TestConfigFile:
    def test_file_overrides_defaults_and_flags_override_file(self, tmp_path):
        panel_path = tmp_path / "panel.csv"
        write_iid_panel(panel_path, 120, 1, seed=1)
        cfg = tmp_path / "run.cfg"
        cfg.write_text("kalman-q = 0.5\n# comment\ngarch-gtol = 1e-5\n")

        out1 = tmp_path / "o1"
        assert run("fit", panel_path, "--config", cfg, "--out-dir", out1) == 0
        echo = (out1 / "config.echo").read_text()
        assert "kalman_q=0.5" in echo and "garch_gtol=1.0000000000000001e-05" in echo

        out2 = tmp_path / "o2"
        assert run("fit", panel_path, "--config", cfg, "--kalman-q", 0.25,
                   "--out-dir", out2) == 0
        assert "kalman_q=0.25" in (out2 / "config.echo").read_text()

    def test_unknown_key_is_exit_2(self, tmp_path):
        panel_path = tmp_path / "panel.csv"
        write_iid_panel(panel_path, 120, 1, seed=1)
        cfg = tmp_path / "run.cfg"
        cfg.write_text("not-an-option = 1\n")
        assert run("fit", panel_path, "--config", cfg, "--out-dir", tmp_path) == 2

    def test_boolean_in_config_file(self, tmp_path):
        panel_path = tmp_path / "panel.csv"
        write_iid_panel(panel_path, 120, 1, seed=1)
        cfg = tmp_path / "run.cfg"
        cfg.write_text("two-pass = true\n")
        out = tmp_path / "out"
        assert run("fit", panel_path, "--config", cfg, "--out-dir", out) == 0
        assert "two_pass=True" in (out / "config.echo").read_text()
