import json
import os

import numpy as np
import pytest

from vortexlab import cli
from vortexlab import profile_solver as ps


def run(capsys, *argv):
    rc = cli.main(list(argv))
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


class TestConstants:
    def test_json_payload(self, capsys):
        rc, out, _ = run(capsys, "constants", "--p", "3", "--omega", "1")
        assert rc == 0
        doc = json.loads(out)
        assert doc["schema"] == "vortexlab-constants-v1"
        assert doc["c"] == 1.5
        assert doc["alpha0"] == pytest.approx(2 ** 0.5, rel=1e-15)
        assert doc["config"]["p"] == 3.0

    def test_omega_scaling(self, capsys):
        rc, out, _ = run(capsys, "constants", "--p", "3", "--omega", "4")
        assert rc == 0
        assert json.loads(out)["c"] == 6.0

    def test_gamma_null_above_validity(self, capsys):
        rc, out, _ = run(capsys, "constants", "--p", "5", "--omega", "1")
        assert rc == 0
        assert json.loads(out)["gamma"] is None

    def test_invalid_p_exit_2(self, capsys):
        rc, _, err = run(capsys, "constants", "--p", "1", "--omega", "1")
        assert rc == 2
        assert "error" in err

    def test_deterministic_bytes(self, capsys):
        _, out1, _ = run(capsys, "constants", "--p", "3", "--omega", "1")
        _, out2, _ = run(capsys, "constants", "--p", "3", "--omega", "1")
        assert out1 == out2


class TestProfile:
    def test_write_and_cache_identical_bytes(self, capsys, tmp_path):
        out = tmp_path / "prof.json"
        rc, stdout, _ = run(capsys, "profile", "--p", "3", "--omega", "1",
                            "--m", "8", "--out", str(out))
        assert rc == 0
        doc = json.loads(stdout)
        assert doc["converged"] is True
        assert doc["peak_value"] == pytest.approx(1.732, abs=5e-3)
        first = out.read_bytes()
        rc, _, _ = run(capsys, "profile", "--p", "3", "--omega", "1",
                       "--m", "8", "--out", str(out))
        assert rc == 0
        assert out.read_bytes() == first
        prof = ps.profile_from_json(first.decode())
        assert prof.m == 8 and prof.converged

    def test_missing_required_exit_2(self, capsys):
        rc, _, err = run(capsys, "profile", "--p", "3", "--omega", "1")
        assert rc == 2
        assert "--m" in err

    def test_coarse_grid_exit_2(self, capsys):
        rc, _, err = run(capsys, "profile", "--p", "3", "--omega", "1",
                         "--m", "32", "--n", "100")
        assert rc == 2
        assert "coarse" in err

    def test_unreachable_tolerance_exit_3(self, capsys):
        rc, _, err = run(capsys, "profile", "--p", "3", "--omega", "1",
                         "--m", "8", "--tol", "1e-30")
        assert rc == 3
        assert "error" in err


class TestAsymptotics:
    def test_csv_and_summary(self, capsys, tmp_path):
        out = tmp_path / "asym.csv"
        rc, stdout, _ = run(capsys, "asymptotics", "--p", "3", "--omega", "1",
                            "--m-list", "8,16,32", "--out", str(out))
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "m,h2_err,linf_err,peak_offset"
        assert len(lines) == 4
        doc = json.loads(stdout)
        assert -1.35 <= doc["rate_linf"] <= -0.65
        assert os.path.exists(tmp_path / "asym.png")

    def test_single_m_no_fit(self, capsys):
        rc, out, err = run(capsys, "asymptotics", "--p", "3", "--omega", "1",
                           "--m-list", "8")
        assert rc == 0
        assert out.splitlines()[0] == "m,h2_err,linf_err,peak_offset"
        assert json.loads(err)["rate_linf"] is None

    def test_empty_list_exit_2(self, capsys):
        rc, _, _ = run(capsys, "asymptotics", "--p", "3", "--omega", "1",
                       "--m-list", ",")
        assert rc == 2

    def test_no_plot(self, capsys, tmp_path):
        out = tmp_path / "a.csv"
        rc, _, _ = run(capsys, "asymptotics", "--p", "3", "--omega", "1",
                       "--m-list", "8,16", "--out", str(out), "--no-plot")
        assert rc == 0
        assert out.exists()
        assert not (tmp_path / "a.png").exists()


class TestSpectrum:
    def test_json_payload(self, capsys):
        rc, out, _ = run(capsys, "spectrum", "--p", "3", "--omega", "1",
                         "--m", "16", "--j", "4", "--k", "3")
        assert rc == 0
        doc = json.loads(out)
        assert doc["schema"] == "vortexlab-spectrum-v1"
        assert doc["delta"] == 0.25
        assert doc["bracket_lo"] <= doc["max_re"] <= doc["bracket_hi"]
        assert doc["in_bracket"] is True
        assert all(e["residual"] <= 1e-8 for e in doc["eigenvalues"])

    def test_j_too_large_exit_2(self, capsys):
        rc, _, _ = run(capsys, "spectrum", "--p", "3", "--omega", "1",
                       "--m", "8", "--j", "9")
        assert rc == 2


class TestScan:
    def test_csv_and_flag(self, capsys, tmp_path):
        out = tmp_path / "scan.csv"
        rc, stdout, _ = run(capsys, "scan", "--p", "3", "--omega", "1",
                            "--m", "16", "--j-range", "2:6:2", "--out", str(out))
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "m,j,delta,max_re,predicted,bracket_lo,bracket_hi,in_bracket"
        assert len(lines) == 4
        assert all(line.endswith("true") for line in lines[1:])
        doc = json.loads(stdout)
        assert doc["j_star"] == 1
        assert (tmp_path / "scan.png").exists()

    def test_range_parsing_comma(self, capsys):
        rc, out, _ = run(capsys, "scan", "--p", "3", "--omega", "1",
                         "--m", "16", "--j-range", "3,5")
        assert rc == 0
        rows = out.splitlines()[1:]
        assert [int(r.split(",")[1]) for r in rows] == [3, 5]

    def test_j_out_of_range_exit_2(self, capsys):
        rc, _, _ = run(capsys, "scan", "--p", "3", "--omega", "1",
                       "--m", "16", "--j-range", "15:17")
        assert rc == 2


class TestReduced:
    def test_p5_exit_4(self, capsys):
        rc, _, _ = run(capsys, "reduced", "--p", "5", "--omega", "1",
                       "--delta", "0.1")
        assert rc == 4

    def test_closed_matches_dense(self, capsys):
        rc, out, _ = run(capsys, "reduced", "--p", "3", "--omega", "1",
                         "--delta", "0.25")
        assert rc == 0
        doc = json.loads(out)
        for a, b in zip(doc["eigenvalues"], doc["eigenvalues_dense"]):
            assert a["re"] == pytest.approx(b["re"], abs=1e-12)
            assert a["im"] == pytest.approx(b["im"], abs=1e-12)
        assert doc["b1"] == pytest.approx(3.0, rel=1e-9)


class TestEvolve:
    def test_rate_and_outputs(self, capsys, tmp_path):
        out = tmp_path / "traj.csv"
        rc, stdout, _ = run(capsys, "evolve", "--p", "3", "--omega", "1",
                            "--m", "16", "--j", "4", "--T", "25", "--dt", "0.05",
                            "--out", str(out))
        assert rc == 0
        doc = json.loads(stdout)
        assert doc["rate"] == pytest.approx(0.4185, rel=0.1)
        lines = out.read_text().splitlines()
        assert lines[0] == "t,norm"
        assert len(lines) == 502
        assert (tmp_path / "traj.png").exists()

    def test_bad_dt_exit_2(self, capsys):
        rc, _, _ = run(capsys, "evolve", "--p", "3", "--omega", "1",
                       "--m", "16", "--j", "4", "--dt", "0")
        assert rc == 2

    def test_seeded_determinism(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (a, b):
            rc, _, _ = run(capsys, "evolve", "--p", "3", "--omega", "1",
                           "--m", "16", "--j", "4", "--T", "10", "--dt", "0.1",
                           "--seed", "7", "--out", str(path), "--no-plot")
            assert rc == 0
        assert a.read_bytes() == b.read_bytes()

    def test_eigenvector_init(self, capsys):
        rc, out, _ = run(capsys, "evolve", "--p", "3", "--omega", "1",
                         "--m", "16", "--j", "4", "--T", "12", "--dt", "0.05",
                         "--init", "eigenvector")
        assert rc == 0
        # CSV on stdout; summary on stderr was consumed by capsys above
        assert out.splitlines()[0] == "t,norm"

    def test_file_init(self, capsys, tmp_path, params3):
        from vortexlab import operators as op
        # the CLI solves on the default grid sized for sector index m + |j|
        n = op.default_radial_grid(params3, 16, guard_index=20).n
        rng = np.random.default_rng(0)
        state = {
            "schema": "vortexlab-state-v1",
            "w1_re": rng.standard_normal(n).tolist(),
            "w1_im": rng.standard_normal(n).tolist(),
            "w2_re": rng.standard_normal(n).tolist(),
            "w2_im": rng.standard_normal(n).tolist(),
        }
        path = tmp_path / "state.json"
        path.write_text(json.dumps(state))
        rc, out, _ = run(capsys, "evolve", "--p", "3", "--omega", "1",
                         "--m", "16", "--j", "4", "--T", "10", "--dt", "0.1",
                         "--init", "file", "--init-file", str(path))
        assert rc == 0

    def test_file_init_missing_path_exit_2(self, capsys):
        rc, _, _ = run(capsys, "evolve", "--p", "3", "--omega", "1",
                       "--m", "16", "--j", "4", "--init", "file")
        assert rc == 2


class TestConfigFile:
    def test_config_supplies_and_flags_override(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("p = 3\nomega = 1\n# a comment\nm = 16\nj = 4\n")
        rc, out, _ = run(capsys, "spectrum", "--config", str(cfg), "--k", "2")
        assert rc == 0
        assert json.loads(out)["j"] == 4
        rc, out, _ = run(capsys, "spectrum", "--config", str(cfg), "--k", "2",
                         "--j", "2")
        assert rc == 0
        doc = json.loads(out)
        assert doc["j"] == 2
        assert doc["config"]["j"] == 2

    def test_malformed_config_exit_2(self, capsys, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("just some words\n")
        rc, _, _ = run(capsys, "constants", "--config", str(cfg),
                       "--p", "3", "--omega", "1")
        assert rc == 2

    def test_missing_config_file_exit_2(self, capsys):
        rc, _, _ = run(capsys, "constants", "--config", "/nonexistent.cfg",
                       "--p", "3", "--omega", "1")
        assert rc == 2
