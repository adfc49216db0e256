"""Command line interface: CSV output, manifests, determinism, errors."""

import csv
import json
import math
import shutil
import subprocess

import pytest

from sublandau.bounds import support_entropy_bits
from sublandau.cli import DEFAULT_SEED, main
from sublandau.runio import manifest_path, sha256_file


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def cell(header, row, name):
    return row[header.index(name)]


class TestFig1:
    def test_columns_and_values(self, tmp_path):
        out = tmp_path / "fig1.csv"
        rc = main(["fig1", "--snr-db", "0,10", "--trials", "300",
                   "--no-plot", "--out", str(out)])
        assert rc == 0
        header, rows = read_csv(out)
        assert header == ["snr_db", "i_mup_bits", "i_mimo_gauss_bits",
                          "i_mimo_gauss_se", "i_fourier_bits", "i_fourier_se"]
        assert len(rows) == 2
        assert abs(float(cell(header, rows[0], "i_mup_bits")) - 3.0) < 1e-12
        expected10 = 3 * math.log2(11.0)
        assert abs(float(cell(header, rows[1], "i_mup_bits")) - expected10) < 1e-12
        for row in rows:
            imup = float(cell(header, row, "i_mup_bits"))
            assert float(cell(header, row, "i_mimo_gauss_bits")) < imup
            assert float(cell(header, row, "i_fourier_bits")) < imup
            assert float(cell(header, row, "i_mimo_gauss_se")) > 0

    def test_single_trial_reports_infinite_se(self, tmp_path):
        out = tmp_path / "fig1.csv"
        rc = main(["fig1", "--snr-db", "10", "--trials", "1",
                   "--no-plot", "--out", str(out)])
        assert rc == 0
        header, rows = read_csv(out)
        assert math.isinf(float(cell(header, rows[0], "i_mimo_gauss_se")))
        assert math.isfinite(float(cell(header, rows[0], "i_mimo_gauss_bits")))


class TestFig3:
    def test_mode_subset_leaves_columns_blank(self, tmp_path):
        out = tmp_path / "fig3.csv"
        rc = main(["fig3", "--snr-db", "13", "--trials", "400",
                   "--modes", "single-genie", "--no-plot", "--out", str(out)])
        assert rc == 0
        header, rows = read_csv(out)
        row = rows[0]
        assert cell(header, row, "p_err_full") == ""
        assert cell(header, row, "p_err_nn_genie_hw") == ""
        p_single = float(cell(header, row, "p_err_single_genie"))
        assert 0.0 <= p_single <= 1.0
        pw = float(cell(header, row, "analytic_pairwise"))
        un = float(cell(header, row, "analytic_union"))
        assert abs(un - 24 * pw) < 1e-12 * un

    def test_subset_matches_coupled_run(self, tmp_path):
        common = ["fig3", "--snr-db", "18", "--trials", "600", "--seed", "9",
                  "--no-plot"]
        a = tmp_path / "all.csv"
        b = tmp_path / "one.csv"
        assert main(common + ["--out", str(a)]) == 0
        assert main(common + ["--modes", "single-genie", "--out", str(b)]) == 0
        ha, ra = read_csv(a)
        hb, rb = read_csv(b)
        assert cell(ha, ra[0], "p_err_single_genie") == cell(hb, rb[0], "p_err_single_genie")
        assert cell(ha, ra[0], "p_err_single_genie_hw") == cell(hb, rb[0], "p_err_single_genie_hw")

    def test_bit_identical_across_runs_and_threads(self, tmp_path):
        base = ["fig3", "--snr-db", "18", "--trials", "4000", "--modes", "full",
                "--no-plot", "--seed", "5"]
        blobs = []
        for name, threads in (("a.csv", "1"), ("b.csv", "1"), ("c.csv", "3")):
            out = tmp_path / name
            assert main(base + ["--threads", threads, "--out", str(out)]) == 0
            blobs.append(out.read_bytes())
        assert blobs[0] == blobs[1] == blobs[2]

    def test_trials_list_must_match_grid(self, tmp_path, capsys):
        rc = main(["fig3", "--snr-db", "8", "--trials", "100,200",
                   "--no-plot", "--out", str(tmp_path / "x.csv")])
        assert rc == 2
        err = json.loads(capsys.readouterr().err.strip())
        assert err["error"]["code"] == "usage"


class TestThreshold:
    def test_converged_search(self, tmp_path):
        out = tmp_path / "thr.csv"
        rc = main(["threshold", "--trials", "2000", "--tol-db", "0.5",
                   "--out", str(out)])
        assert rc == 0
        header, rows = read_csv(out)
        row = rows[0]
        assert cell(header, row, "status") == "converged"
        thr = float(cell(header, row, "threshold_db"))
        assert 0.0 < thr < 20.0
        assert float(cell(header, row, "ci_lo_db")) <= thr <= float(cell(header, row, "ci_hi_db"))
        target = float(cell(header, row, "target_bits"))
        assert abs(target - support_entropy_bits(10, 6)) < 1e-9
        assert int(cell(header, row, "evaluations")) >= 3

    def test_infeasible_reported_not_raised(self, tmp_path):
        out = tmp_path / "thr.csv"
        rc = main(["threshold", "--r-c", "50", "--trials", "500",
                   "--out", str(out)])
        assert rc == 0
        header, rows = read_csv(out)
        assert cell(header, rows[0], "status") == "infeasible"
        assert math.isnan(float(cell(header, rows[0], "threshold_db")))


class TestAsymptotics:
    def test_gaussian_gap_and_required_snr(self, tmp_path):
        out = tmp_path / "asy.csv"
        rc = main(["asymptotics", "--q-ratio", "0.6", "--p-ratio", "0.3",
                   "--out", str(out)])
        assert rc == 0
        header, rows = read_csv(out)
        row = rows[0]
        assert abs(float(cell(header, row, "c_gap_bits_per_meas")) - 0.4426950408889634) < 1e-12
        snr_db = float(cell(header, row, "snr_db_no_gap"))
        assert abs(10.0 ** (snr_db / 10.0) - 8.425061168732315) < 1e-8
        assert cell(header, row, "psi") == ""

    def test_fourier_gap_and_psi(self, tmp_path):
        out = tmp_path / "asy.csv"
        rc = main(["asymptotics", "--q-ratio", "0.6", "--p-ratio", "0.3",
                   "--kind", "fourier", "--out", str(out)])
        assert rc == 0
        header, rows = read_csv(out)
        row = rows[0]
        assert abs(float(cell(header, row, "psi")) - 1.0) < 1e-12
        assert abs(float(cell(header, row, "c_gap_bits_per_meas")) - 0.20067073660276946) < 1e-12

    def test_dense_limit_has_zero_fourier_gap(self, tmp_path):
        out = tmp_path / "asy.csv"
        rc = main(["asymptotics", "--q-ratio", "1", "--p-ratio", "0.5",
                   "--kind", "fourier", "--out", str(out)])
        assert rc == 0
        header, rows = read_csv(out)
        row = rows[0]
        assert float(cell(header, row, "c_gap_bits_per_meas")) == 0.0
        # very-sparse approximation is undefined at full occupancy
        assert cell(header, row, "snr_db_very_sparse_no_gap") == ""


class TestSubband:
    def test_scenario_columns(self, tmp_path):
        out = tmp_path / "sb.csv"
        rc = main(["subband", "--k", "16", "--w-hz", "16", "--t-s", "1",
                   "--q-ratio", "0.25", "--p-ratio", "0.125", "--out", str(out)])
        assert rc == 0
        header, rows = read_csv(out)
        row = rows[0]
        assert int(cell(header, row, "occupied_subbands")) == 4
        assert abs(float(cell(header, row, "entropy_exact_bits")) - math.log2(1820)) < 1e-9
        log2_term = float(cell(header, row, "log2_one_plus_snr"))
        snr_db = float(cell(header, row, "snr_db"))
        assert abs(math.log2(1.0 + 10.0 ** (snr_db / 10.0)) - log2_term) < 1e-9

    def test_invariant_violation_is_domain_error(self, tmp_path, capsys):
        rc = main(["subband", "--k", "16", "--w-hz", "2", "--t-s", "1",
                   "--q-ratio", "0.25", "--p-ratio", "0.125",
                   "--out", str(tmp_path / "sb.csv")])
        assert rc == 2
        err = json.loads(capsys.readouterr().err.strip())
        assert err["error"]["code"] == "domain"


class TestCodebookDemo:
    def test_rows_and_rates(self, tmp_path):
        out = tmp_path / "demo.csv"
        rc = main(["codebook-demo", "--block-lengths", "2",
                   "--num-messages", "1,4", "--trials", "25",
                   "--no-plot", "--out", str(out)])
        assert rc == 0
        header, rows = read_csv(out)
        assert len(rows) == 2
        assert float(cell(header, rows[0], "r_c_bits_per_use")) == 0.0
        assert abs(float(cell(header, rows[1], "r_c_bits_per_use")) - 1.0) < 1e-12
        total = float(cell(header, rows[1], "total_rate_bits_per_use"))
        assert abs(total - (1.0 + math.log2(6))) < 1e-12
        assert cell(header, rows[0], "support_known") == "1"
        for row in rows:
            assert 0.0 <= float(cell(header, row, "msg_err")) <= 1.0
            assert 0.0 <= float(cell(header, row, "sup_seq_err")) <= 1.0


class TestManifest:
    def test_manifest_contents(self, tmp_path):
        out = tmp_path / "asy.csv"
        rc = main(["asymptotics", "--q-ratio", "0.6", "--p-ratio", "0.3",
                   "--out", str(out)])
        assert rc == 0
        mpath = manifest_path(out)
        assert mpath.name == "asy.manifest.json"
        doc = json.loads(mpath.read_text())
        assert doc["master_seed"] == DEFAULT_SEED
        assert doc["command"].startswith("sublandau asymptotics")
        assert doc["outputs"]["asy.csv"] == sha256_file(out)
        assert doc["parameters"]["q_ratio"] == 0.6
        assert "numpy" in doc["versions"]


class TestPlots:
    def test_png_written_next_to_csv(self, tmp_path):
        out = tmp_path / "fig1.csv"
        rc = main(["fig1", "--snr-db", "10", "--trials", "100", "--out", str(out)])
        assert rc == 0
        assert (tmp_path / "fig1.png").exists()

    def test_no_plot_skips_png(self, tmp_path):
        out = tmp_path / "fig1.csv"
        rc = main(["fig1", "--snr-db", "10", "--trials", "100",
                   "--no-plot", "--out", str(out)])
        assert rc == 0
        assert not (tmp_path / "fig1.png").exists()


class TestErrorReporting:
    def test_domain_error(self, tmp_path, capsys):
        rc = main(["fig1", "--n", "5", "--q", "6", "--no-plot",
                   "--out", str(tmp_path / "x.csv")])
        assert rc == 2
        err = json.loads(capsys.readouterr().err.strip())
        assert err["error"]["code"] == "domain"
        assert "q must satisfy" in err["error"]["message"]

    def test_usage_error_unknown_mode(self, tmp_path, capsys):
        rc = main(["fig3", "--modes", "bogus", "--no-plot",
                   "--out", str(tmp_path / "x.csv")])
        assert rc == 2
        err = json.loads(capsys.readouterr().err.strip())
        assert err["error"]["code"] == "usage"

    def test_usage_error_unknown_command(self, capsys):
        rc = main(["frobnicate"])
        assert rc == 2
        err = json.loads(capsys.readouterr().err.strip())
        assert err["error"]["code"] == "usage"

    def test_io_error(self, tmp_path, capsys):
        # the output path is an existing directory
        rc = main(["asymptotics", "--q-ratio", "0.6", "--p-ratio", "0.3",
                   "--out", str(tmp_path)])
        assert rc == 3
        err = json.loads(capsys.readouterr().err.strip())
        assert err["error"]["code"] == "io"


class TestConsoleScript:
    def test_entry_point_smoke(self, tmp_path):
        script = shutil.which("sublandau")
        assert script, "console script not on PATH"
        out = tmp_path / "asy.csv"
        proc = subprocess.run(
            [script, "asymptotics", "--q-ratio", "0.6", "--p-ratio", "0.3",
             "--out", str(out)],
            capture_output=True, text=True, timeout=120,
        )
        assert proc.returncode == 0, proc.stderr
        assert "[asymptotics]" in proc.stdout
        assert out.exists()
