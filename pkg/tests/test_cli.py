import json

import numpy as np
import pytest

from rankica import cli
from rankica.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, main, read_data_csv
from rankica.errors import ParseError


def _write_sample(path, n=400, seed=0):
    rng = np.random.default_rng(seed)
    Z = np.column_stack([rng.uniform(-1, 1, n), rng.laplace(size=n), rng.exponential(size=n)])
    L = np.array([[1.0, 0.5, 0.5], [0.5, 1.0, 0.5], [0.5, 0.5, 1.0]])
    np.savetxt(path, Z @ L.T, delimiter=",")


def test_read_data_csv(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("# comment\n1,2\n\n3,4.5\n")
    np.testing.assert_array_equal(read_data_csv(p), [[1, 2], [3, 4.5]])
    p.write_text("1,2\n3\n")
    with pytest.raises(ParseError):
        read_data_csv(p)
    p.write_text("1,a\n")
    with pytest.raises(ParseError):
        read_data_csv(p)


def test_simulate(tmp_path, capsys):
    args = ["simulate", "--setup", "A", "--n", "100", "--M", "2", "--seed", "3", "--no-timing"]
    args += ["--estimators", "fobi;fastica", "--out", str(tmp_path / "a")]
    assert main(args) == EXIT_OK
    assert "root seed: 3" in capsys.readouterr().err
    csv_a = (tmp_path / "a" / "sim_A_n100.csv").read_bytes()
    summary = json.loads((tmp_path / "a" / "sim_A_n100_summary.json").read_text())
    assert set(summary["summary"]) == {"fobi", "fastica"}
    args[-1] = str(tmp_path / "b")
    assert main(args) == EXIT_OK
    assert (tmp_path / "b" / "sim_A_n100.csv").read_bytes() == csv_a


def test_simulate_with_config(tmp_path):
    cfg = tmp_path / "sim.ini"
    cfg.write_text("[simulation]\nsetup = B\nn = 120\nM = 2\nseed = 1\nestimators = fobi\ntiming = false\n")
    assert main(["simulate", "--config", str(cfg), "--seed", "2", "--out", str(tmp_path)]) == EXIT_OK
    rows = (tmp_path / "sim_B_n120.csv").read_text().splitlines()
    assert len(rows) == 3


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "--config", "/nonexistent/sim.ini"],
        ["simulate", "--setup", "Q"],
        ["simulate", "--n", "many"],
        ["frobnicate"],
    ],
)
def test_config_errors_exit_2(tmp_path, argv):
    assert main(argv + ["--out", str(tmp_path)] if argv[0] != "frobnicate" else argv) == EXIT_CONFIG


def test_estimate(tmp_path):
    data = tmp_path / "x.csv"
    _write_sample(data)
    out = tmp_path / "o"
    assert main(["estimate", str(data), "--estimator", "r(prelim=fobi,steps=1)", "--out", str(out)]) == EXIT_OK
    M = np.loadtxt(out / "mixing.csv", delimiter=",")
    np.testing.assert_allclose(np.diag(M), 1.0)
    diag = json.loads((out / "diagnostics.json").read_text())
    assert diag["n"] == 400 and diag["k"] == 3
    assert len(diag["per_step"]) == 1


def test_estimate_errors(tmp_path):
    data = tmp_path / "x.csv"
    data.write_text("1,2\n3\n")
    assert main(["estimate", str(data), "--out", str(tmp_path)]) == EXIT_CONFIG
    _write_sample(data)
    assert main(["estimate", str(data), "--estimator", "nope(", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["estimate", str(tmp_path / "missing.csv"), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_estimate_single_column_warns(tmp_path):
    data = tmp_path / "x.csv"
    np.savetxt(data, np.random.default_rng(0).normal(size=(50, 1)))
    with pytest.warns(UserWarning):
        assert main(["estimate", str(data), "--out", str(tmp_path)]) == EXIT_OK
    assert np.loadtxt(tmp_path / "mixing.csv") == 1.0


def test_numeric_failure_exit_3(tmp_path):
    data = tmp_path / "x.csv"
    t = np.random.default_rng(1).normal(size=200)
    np.savetxt(data, np.column_stack([t, t, t]), delimiter=",")
    assert main(["estimate", str(data), "--estimator", "fobi", "--out", str(tmp_path)]) == EXIT_NUMERIC


def test_demix_image(tmp_path):
    out = tmp_path / "img"
    argv = ["demix-image", "--generate", "--height", "32", "--width", "40", "--steps", "1", "--out", str(out)]
    assert main(argv) == EXIT_OK
    names = {p.name for p in out.iterdir()}
    assert {f"source_c{j}.pgm" for j in range(3)} <= names
    assert {f"mixed_c{j}.pgm" for j in range(3)} <= names
    assert {f"demixed_fobi_t01_c{j}.pgm" for j in range(3)} <= names
    assert {f"demixed_fastica_t01_c{j}.pgm" for j in range(3)} <= names
    assert len((out / "trace.csv").read_text().splitlines()) == 5


def test_demix_image_from_files(tmp_path):
    src = tmp_path / "src"
    assert main(["demix-image", "--generate", "--height", "32", "--width", "40", "--steps", "0", "--out", str(src)]) == 0
    files = [str(src / f"source_c{j}.pgm") for j in range(3)]
    out = tmp_path / "o"
    assert main(["demix-image", *files, "--prelim", "fobi", "--steps", "0", "--out", str(out)]) == EXIT_OK
    assert (out / "demixed_fobi_t00_c2.pgm").exists()
    assert main(["demix-image", files[0], "--out", str(out)]) == EXIT_CONFIG
    assert main(["demix-image", files[0], files[1], str(tmp_path / "none.pgm"), "--out", str(out)]) == EXIT_CONFIG


def test_parser_help_exits_cleanly(capsys):
    assert cli.main(["--help"]) == EXIT_OK
    assert "simulate" in capsys.readouterr().out
