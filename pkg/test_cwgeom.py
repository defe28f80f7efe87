"""
Tests for the cwgeom orchestrator and command line
"""

import csv
import logging

import numpy as np
import pytest

from cwgeom import SORTED, BenchRunFailed, CwGeom, _below_quarter, run
from tools.core_geometry import Point
from tools.oracles import expected_edge_count
from tools.workspace_harness import AUDIT_CSV_COLUMNS, OutputSink
from utils.config import DEFAULT_CONFIG, RunConfig
from utils.helpers import random_points, write_points_file


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    for key in DEFAULT_CONFIG:
        monkeypatch.delenv("CWGEOM_" + key, raising=False)


@pytest.fixture
def points_file(tmp_path):
    points = random_points(60, np.random.default_rng(0), bound=1 << 16)
    path = tmp_path / "points.txt"
    write_points_file(str(path), points)
    return str(path), points


def _lines(text):
    return [line for line in text.splitlines() if line]


def test_triangulate_prints_every_edge(points_file, capsys):
    path, points = points_file
    assert run(["triangulate", "--input", path, "--workspace", "4", "--audit"]) == 0
    out, err = capsys.readouterr()
    lines = _lines(out)
    assert len(lines) == expected_edge_count(points)
    assert all(line.startswith("E ") for line in lines)
    assert "audit: n=60 s=4" in err


def test_triangulate_sorted_mode_to_a_file(tmp_path, capsys):
    points = sorted(random_points(40, np.random.default_rng(1)))
    source = tmp_path / "sorted.txt"
    write_points_file(str(source), points)
    target = tmp_path / "edges.txt"
    assert run(["triangulate", "--input", str(source), "-s", "3", "--mode", SORTED,
                "--out", str(target)]) == 0
    assert capsys.readouterr().out == ""
    assert len(_lines(target.read_text())) == expected_edge_count(points)


def test_voronoi_is_reproducible_by_seed(points_file, capsys):
    path, _ = points_file
    assert run(["voronoi", "--input", path, "-s", "5", "--seed", "7"]) == 0
    first = capsys.readouterr().out
    assert run(["voronoi", "--input", path, "-s", "5", "--seed", "7"]) == 0
    second = capsys.readouterr().out
    assert first == second
    assert all(line.startswith("V ") for line in _lines(first))


def test_voronoi_audit_echoes_the_seed(points_file, capsys):
    path, _ = points_file
    assert run(["voronoi", "--input", path, "-s", "5", "--seed", "11", "--audit"]) == 0
    assert "seed=11" in capsys.readouterr().err


def test_voronoi_output_equals_the_oracle_output(points_file, capsys):
    path, _ = points_file
    assert run(["voronoi", "--input", path, "-s", "6", "--seed", "2"]) == 0
    constrained = sorted(_lines(capsys.readouterr().out))
    assert run(["oracle", "--input", path, "--what", "voronoi"]) == 0
    assert constrained == sorted(_lines(capsys.readouterr().out))

    assert run(["voronoi", "--input", path, "-s", "6", "--seed", "2", "--emit", "delaunay"]) == 0
    constrained = sorted(_lines(capsys.readouterr().out))
    assert run(["oracle", "--input", path, "--what", "delaunay"]) == 0
    assert constrained == sorted(_lines(capsys.readouterr().out))


def test_oracle_hull_is_a_closed_cycle(tmp_path, capsys):
    path = tmp_path / "square.txt"
    write_points_file(str(path), [Point(0, 0), Point(0, 2), Point(2, 2), Point(2, 0), Point(1, 1)])
    assert run(["oracle", "--input", str(path), "--what", "hull"]) == 0
    assert _lines(capsys.readouterr().out) == ["H 0 1", "H 1 2", "H 2 3", "H 3 0"]


@pytest.mark.parametrize("what", ["triangulation", "voronoi", "delaunay"])
def test_verify_against_the_oracle(points_file, what):
    path, _ = points_file
    assert run(["verify", "--input", path, "--against", "oracle", "--what", what,
                "-s", "4", "--seed", "3"]) == 0


def test_malformed_input_reports_the_line(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text("0 0\n1 x\n2 2\n")
    assert run(["triangulate", "--input", str(path), "-s", "2"]) == 1
    assert "line 2" in capsys.readouterr().err


def test_missing_input_file(tmp_path, capsys):
    assert run(["voronoi", "--input", str(tmp_path / "none.txt"), "-s", "2"]) == 1
    assert "error:" in capsys.readouterr().err


def test_budget_violation_exits_2(points_file, tmp_path):
    path, _ = points_file
    config = tmp_path / "tight.env"
    config.write_text("BUDGET_C_TRIANGULATION=1\n")
    assert run(["triangulate", "--input", path, "-s", "4", "--config", str(config)]) == 2


def test_collinear_input_exits_3(tmp_path):
    path = tmp_path / "line.txt"
    write_points_file(str(path), [Point(i, i) for i in range(10)])
    assert run(["triangulate", "--input", str(path), "-s", "2"]) == 3
    assert run(["voronoi", "--input", str(path), "-s", "2"]) == 3


def test_cocircular_rejection_exits_3(tmp_path):
    path = tmp_path / "square.txt"
    write_points_file(str(path), [Point(0, 0), Point(2, 0), Point(2, 2), Point(0, 2)])
    assert run(["voronoi", "--input", str(path), "-s", "2", "--reject-degenerate"]) == 3
    assert run(["voronoi", "--input", str(path), "-s", "2"]) == 0


def test_restart_exhaustion_exits_4(tmp_path):
    points = random_points(200, np.random.default_rng(4))
    path = tmp_path / "points.txt"
    write_points_file(str(path), points)
    config = tmp_path / "strict.env"
    config.write_text("C_M=1\nC_T=1\nMAX_RESTARTS=1\n")
    assert run(["voronoi", "--input", str(path), "-s", "2", "--seed", "1",
                "--config", str(config)]) == 4


def test_bad_config_exits_1(points_file, tmp_path, capsys):
    path, _ = points_file
    config = tmp_path / "bad.env"
    config.write_text("NOT_A_KEY=3\n")
    assert run(["triangulate", "--input", path, "-s", "2", "--config", str(config)]) == 1
    assert "unknown config key" in capsys.readouterr().err


def test_bench_writes_one_row_per_run(tmp_path):
    target = tmp_path / "bench.csv"
    assert run(["bench", "--n-grid", "64,128", "--s-grid", "4,32", "--seeds", "0,1",
                "--workers", "2", "--out", str(target)]) == 0
    with open(target, newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == AUDIT_CSV_COLUMNS
    assert len(rows) == 1 + 2 * 2 * 2
    body = [dict(zip(rows[0], row)) for row in rows[1:]]
    for seed_block in (body[:4], body[4:]):
        for n_block in (seed_block[:2], seed_block[2:]):
            small, large = n_block
            assert (small["s"], large["s"]) == ("4", "32")
            assert int(large["input_reads"]) < int(small["input_reads"])


def test_bench_keeps_the_exit_code_of_a_failed_run(tmp_path, capsys):
    config = tmp_path / "tight.env"
    config.write_text("BUDGET_C_TRIANGULATION=1\n")
    assert run(["bench", "--n-grid", "64", "--s-grid", "4", "--workers", "1",
                "--config", str(config), "--out", str(tmp_path / "bench.csv")]) == 2
    assert "bench run n=64 s=4 seed=0" in capsys.readouterr().err


def test_bench_failure_carries_the_budget_exit_code():
    geom = CwGeom(config=RunConfig(budget_c_triangulation=1))
    with pytest.raises(BenchRunFailed) as info:
        geom.bench([64], [4], [0], workers=1)
    assert info.value.exit_code == 2


def test_calibrate_prints_a_config_file(tmp_path, capsys):
    assert run(["calibrate", "--n", "80", "--workspace", "6", "--seeds", "3"]) == 0
    out = capsys.readouterr().out
    values = dict(line.lstrip("# ").split("=", 1) for line in _lines(out))
    assert set(values) == {"C_M", "C_T", "MEAN_ROUNDS", "MAX_ROUNDS", "MEAN_RESTARTS"}
    tuned = tmp_path / "tuned.env"
    tuned.write_text(out)
    config = RunConfig.from_file(str(tuned))
    assert config.c_m == int(values["C_M"]) >= 1
    assert config.c_t == int(values["C_T"])


def test_results_dict_on_success_and_failure():
    geom = CwGeom(config=RunConfig())
    points = random_points(30, np.random.default_rng(5))
    results = geom.triangulate(points, 3, sink=OutputSink("edge", collect=True))
    assert results["status"] == "complete"
    assert results["audit"].emits == expected_edge_count(points)
    assert results["steps"]["triangulation"]["edges"] == expected_edge_count(points)
    failed = geom.voronoi([Point(0, 0), Point(1, 1), Point(2, 2)], 2, seed=1)
    assert failed["status"] == "error"
    assert failed["exit_code"] == 3


def test_verbose_steps_go_to_stderr(capsys):
    geom = CwGeom(verbose=True, config=RunConfig())
    geom.triangulate(random_points(20, np.random.default_rng(6)), 2)
    logging.getLogger("cwgeom").handlers.clear()
    out, err = capsys.readouterr()
    assert out == ""
    assert "[1/3] Loading input..." in err


def test_below_quarter():
    assert _below_quarter([1.0, 1.5, 2.2, 9.0]) == 9
    assert _below_quarter([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8]) == 1
    assert _below_quarter([3.5]) == 4
