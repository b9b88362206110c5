"""Tests for the command line interface."""
import csv

import numpy as np
import pytest

from thinningpy.cli import main, parse_measure
from thinningpy.exceptions import ConfigError
from thinningpy.initial_data import Uniform01, quantile_init
from thinningpy.particle_system import TRAJECTORY_COLUMNS, Trajectory


def test_parse_measure(tmp_path):
    measure = parse_measure("1.5,0.5:0.25")
    np.testing.assert_allclose(measure.atoms, [0.5, 1.5])
    np.testing.assert_allclose(measure.weights, [0.25, 1.0])
    table = tmp_path / "mu.txt"
    table.write_text("# x w\n0.0 0.5\n2.0 0.5\n")
    assert parse_measure(f"file:{table}").mass == pytest.approx(1.0)
    with pytest.raises(ConfigError):
        parse_measure("a:b")
    with pytest.raises(ConfigError):
        parse_measure(f"file:{tmp_path / 'missing.txt'}")


def test_bl(capsys):
    assert main(["bl", "--mu", "0:1", "--nu", "1:1", "--oracle"]) == 0
    fast, oracle = (float(line) for line in capsys.readouterr().out.split())
    assert fast == pytest.approx(1.0)
    assert oracle == pytest.approx(1.0, abs=1e-9)


def test_bad_measure_exit_code(capsys):
    assert main(["bl", "--mu", "0:x", "--nu", "1"]) == 2
    assert "BAD_MEASURE" in capsys.readouterr().err


def test_urn_tabulation(tmp_path):
    path = tmp_path / "pmf.csv"
    assert main(["urn", "--n", "4", "--r", "2", "--out", str(path)]) == 0
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["n", "r", "x", "probability"]
    probabilities = {row[2]: float(row[3]) for row in rows[1:]}
    assert probabilities["0"] == pytest.approx(2 / 3)
    assert probabilities["2"] == pytest.approx(1 / 3)


def test_urn_tabulation_needs_one_n(capsys):
    assert main(["urn", "--n", "4,6", "--r", "2"]) == 2
    assert "BAD_SWEEP" in capsys.readouterr().err


def test_odd_particle_count(capsys):
    assert main(["verify-loss", "--n", "3", "--replicas", "2"]) == 2
    assert "ODD_PARTICLE_COUNT" in capsys.readouterr().err


def test_simulate_writes_event_log(tmp_path):
    path = tmp_path / "traj.csv"
    assert main(["simulate", "--n", "6", "--seed", "4", "--out", str(path)]) == 0
    with open(path, newline="") as handle:
        assert tuple(next(csv.reader(handle))) == TRAJECTORY_COLUMNS
    traj = Trajectory.read_csv(path, quantile_init(6, Uniform01()))
    assert traj.n == 6
    removed = {index for pair in traj.removed_pairs for index in pair}
    assert removed == set(range(6))
    assert len(traj.hit_times) == 3


def test_thin_experiment(tmp_path):
    path = tmp_path / "thin.json"
    argv = [
        "thin",
        "--n",
        "8",
        "--fractions",
        "0.5",
        "--eps",
        "0.1",
        "--replicas",
        "10",
        "--format",
        "json",
        "--out",
        str(path),
    ]
    assert main(argv) == 0
    assert len(path.read_text().splitlines()) == 4


def test_version(capsys):
    with pytest.raises(SystemExit) as exit_:
        main(["--version"])
    assert exit_.value.code == 0
    assert capsys.readouterr().out.strip()
