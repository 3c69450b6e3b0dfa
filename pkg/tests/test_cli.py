import json
import math
import subprocess
import sys
from importlib import resources

import jsonschema
import numpy as np
import pytest

from codesketch.cli import choose_dual_bch, main
from codesketch.codes import dual_bch_generator
from codesketch.diagnostics import embedding_error
from codesketch.mmio import load_factors, read_matrix_market
from codesketch.scm import build_scm

SCHEMA = json.loads(resources.files("codesketch").joinpath("schemas/report.schema.json").read_text())


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    data = json.loads(out)
    jsonschema.validate(data, SCHEMA)
    return data


class TestCodeinfo:
    def test_dual_bch_q6_t2(self, capsys):
        res = run_json(capsys, "codeinfo", "--q", 6, "--t", 2)["results"]
        assert res["ell"] == 63 and res["r"] == 12 and res["dual_distance_lb"] >= 5
        assert res["dual_distance"] >= 5

    def test_required_dual_distance(self, capsys):
        res = run_json(capsys, "codeinfo", "--q", 4, "--t", 2, "--require-dual-distance", 4)["results"]
        assert res["dual_distance"] == 5 and res["checks"]["dual_distance_ok"] is True

    def test_hadamard_not_usable(self, capsys):
        res = run_json(capsys, "codeinfo", "--code", "hadamard", "--r", 10,
                       "--require-dual-distance", 4)["results"]
        assert res["ell"] == 1024 and res["r"] == 10
        assert res["checks"]["dual_distance_ok"] is False

    def test_target_size(self, capsys):
        res = run_json(capsys, "codeinfo", "--q", 4, "--t", 1, "--n", 100, "--k", 2)["results"]
        assert res["checks"] == {"size_ok": False, "required_dual_distance_gt": 2,
                                 "dual_distance_ok": True}

    def test_csv(self, capsys):
        code, out, _ = run(capsys, "codeinfo", "--q", 4, "--t", 2, "--format", "csv")
        assert code == 0 and out.startswith("key,value\n") and "ell,15" in out

    def test_generator_file(self, capsys, fixtures):
        res = run_json(capsys, "codeinfo", "--code", "file", "--generator",
                       fixtures / "hamming74.txt")["results"]
        assert res["ell"] == 7 and res["r"] == 4 and res["dual_distance"] == 4

    @pytest.mark.parametrize("argv", [
        ["codeinfo", "--q", "1", "--t", "1"],
        ["codeinfo", "--q", "4", "--t", "8"],
        ["codeinfo", "--t", "2"],
        ["codeinfo", "--ell", "16"],
        ["codeinfo", "--code", "random"],
        ["codeinfo", "--code", "file"],
    ])
    def test_invalid_params(self, capsys, argv):
        code, _, err = run(capsys, *argv)
        assert code == 1 and "error" in err

    def test_argparse_rejects_nonpositive(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["codeinfo", "--q", "0"])
        assert exc.value.code != 0


def test_choose_dual_bch_smallest():
    G, spec = choose_dual_bch(1000, required=4)
    # q = 4, t = 3 has only 2^10 codewords because of a short cyclotomic coset.
    assert (spec.params["q"], spec.params["t"]) == (4, 3)
    assert 1 << spec.dim >= 1000 and spec.dual_distance_lb > 4


class TestLowrank:
    def test_exact_rank_fixture(self, capsys, fixtures):
        data = run_json(capsys, "lowrank", "--input", fixtures / "exact_rank5.mtx", "--k", 5,
                        "--ell", 15, "--oracle", "--trials", 3)
        assert data["results"]["frobenius_ratio"] == 1.0
        assert data["sampler"]["ell"] == 15
        assert data["results"]["bound_frequencies"]["frobenius_ratio"]["frequency"] == 1.0

    def test_byte_identical(self, capsys, fixtures):
        argv = ["lowrank", "--input", fixtures / "sparse_300x120.mtx", "--k", 4, "--seed", 42,
                "--trials", 3]
        _, a, _ = run(capsys, *argv)
        _, b, _ = run(capsys, *argv)
        assert a == b and a

    def test_threads_do_not_change_output(self, capsys, fixtures, monkeypatch):
        argv = ["embed-check", "--n", 256, "--k", 4, "--trials", 12, "--seed", 3]
        monkeypatch.setenv("CODESKETCH_THREADS", "1")
        _, a, _ = run(capsys, *argv)
        monkeypatch.setenv("CODESKETCH_THREADS", "4")
        _, b, _ = run(capsys, *argv)
        assert a == b

    @pytest.mark.parametrize("value", ["zero", "0", "-2"])
    def test_bad_thread_env(self, capsys, monkeypatch, value):
        monkeypatch.setenv("CODESKETCH_THREADS", value)
        code, _, err = run(capsys, "codeinfo", "--q", 4, "--t", 2)
        assert code == 1 and "CODESKETCH_THREADS" in err

    def test_out_directory(self, capsys, fixtures, tmp_path):
        out = tmp_path / "run"
        code, _, err = run(capsys, "lowrank", "--input", fixtures / "exact_rank5.mtx", "--k", 5,
                           "--oracle", "--out", out)
        assert code == 0, err
        U, S, V, meta = load_factors(out)
        A = np.asarray(read_matrix_market(fixtures / "exact_rank5.mtx"))
        assert np.linalg.norm(A - (U * S) @ V.T) <= 1e-9 * np.linalg.norm(A)
        assert meta["k"] == 5 and meta["sampler"]["family"] == "dual-bch"
        jsonschema.validate(json.loads((out / "report.json").read_text()), SCHEMA)

    def test_csv_report(self, capsys, fixtures):
        code, out, _ = run(capsys, "lowrank", "--input", fixtures / "exact_rank5.mtx", "--k", 5,
                           "--oracle", "--format", "csv")
        assert code == 0 and out.splitlines()[0].startswith("name,measured,bound,satisfied")

    @pytest.mark.parametrize("extra", [[], ["--k", "5", "--ell", "3"]])
    def test_errors(self, capsys, fixtures, extra):
        argv = ["lowrank", "--input", fixtures / "exact_rank5.mtx", *extra]
        code, _, err = run(capsys, *argv)
        assert code == 1 and err

    def test_missing_input(self, capsys, tmp_path):
        code, _, err = run(capsys, "lowrank", "--input", tmp_path / "nope.mtx", "--k", 2)
        assert code == 1 and "nope.mtx" in err


class TestSweep:
    def test_three_rows_nonincreasing(self, capsys, fixtures):
        code, out, err = run(capsys, "lowrank", "--input", fixtures / "decay_160x128.mtx",
                             "--sweep", "15,31,63", "--trials", 5, "--format", "csv")
        assert code == 0, err
        lines = out.strip().splitlines()
        assert lines[0] == "ell,e_ell,sigma_ell_plus_1" and len(lines) == 4
        rows = [tuple(map(float, ln.split(","))) for ln in lines[1:]]
        assert [r[0] for r in rows] == [15, 31, 63]
        errs = [r[1] for r in rows]
        assert errs[0] >= errs[1] >= errs[2]
        assert all(e >= s - 1e-12 for _, e, s in rows)

    def test_json(self, capsys, fixtures):
        data = run_json(capsys, "sweep", "--input", fixtures / "decay_160x128.mtx",
                        "--sweep", "15,31", "--trials", 2)
        assert [r["ell"] for r in data["results"]["rows"]] == [15, 31]

    def test_bad_ell(self, capsys, fixtures):
        code, _, err = run(capsys, "sweep", "--input", fixtures / "decay_160x128.mtx", "--sweep", "20")
        assert code == 1 and "2^q - 1" in err


class TestRegress:
    def test_consistent_fixture(self, capsys, fixtures):
        data = run_json(capsys, "regress", "--input", fixtures / "consistent_A.mtx",
                        "--vector", fixtures / "consistent_b.txt", "--trials", 5)
        eps = data["results"]["realized_epsilon"]["residual"]
        assert eps["max"] <= 1e-8
        x = np.loadtxt(fixtures / "consistent_x.txt")
        np.testing.assert_allclose(data["results"]["x_sketch"], x, atol=1e-8)

    def test_out_and_csv(self, capsys, fixtures, tmp_path):
        code, _, err = run(capsys, "regress", "--input", fixtures / "consistent_A.mtx",
                           "--vector", fixtures / "consistent_b.txt", "--out", tmp_path,
                           "--format", "csv")
        assert code == 0, err
        assert (tmp_path / "x.txt").exists() and (tmp_path / "report.csv").exists()

    def test_length_mismatch(self, capsys, fixtures):
        code, _, err = run(capsys, "regress", "--input", fixtures / "exact_rank5.mtx",
                           "--vector", fixtures / "consistent_b.txt")
        assert code == 1 and "vector" in err


class TestEmbedCheck:
    def test_square_hadamard(self, capsys):
        data = run_json(capsys, "embed-check", "--code", "hadamard", "--n", 64, "--k", 5,
                        "--trials", 3)
        assert data["results"]["epsilon"]["max"] <= 1e-10

    def test_matches_library(self, capsys):
        data = run_json(capsys, "embed-check", "--q", 6, "--t", 2, "--n", 1024, "--k", 5,
                        "--trials", 50, "--seed", 7)
        V, _ = np.linalg.qr(np.random.default_rng(7).standard_normal((1024, 5)))
        code = dual_bch_generator(6, 2)
        lib = [embedding_error(V, build_scm(code, 1024, seed=7 + i)).epsilon_measured
               for i in range(50)]
        assert data["results"]["epsilon"]["median"] == pytest.approx(float(np.median(lib)), rel=1e-12)
        assert data["results"]["epsilon"]["median"] <= 0.5

    def test_input_matrix(self, capsys, fixtures):
        data = run_json(capsys, "embed-check", "--input", fixtures / "consistent_A.mtx")
        assert data["results"]["epsilon"]["count"] == 1

    def test_needs_shape(self, capsys):
        code, _, err = run(capsys, "embed-check", "--n", 64)
        assert code == 1 and "--k" in err


def test_console_script(fixtures):
    proc = subprocess.run([sys.executable, "-m", "codesketch.cli", "codeinfo", "--q", "4", "--t", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["results"]["ell"] == 15
    proc = subprocess.run([sys.executable, "-m", "codesketch.cli", "codeinfo", "--q", "99"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode != 0
