import csv
import statistics

import pytest

from wsansim import cli
from wsansim.engine import RunMetrics
from wsansim.harness import (
    ALPHA_GRID,
    DDAS_GRID,
    CellResult,
    ExperimentSpec,
    SweepFailure,
    aggregate,
    emit_csv,
    emit_scatter,
    parse_algorithm,
    policy_for,
    run_cells,
    run_sweep,
)
from wsansim.protocol import Method, Selection
from wsansim.world import WorldConfig

TINY = WorldConfig(width=50, height=50, actor_count=4, elimination_quota=60)


def fake_cells(algorithm="STS-1", params=(0.0, 0.5), seeds=(0, 1, 2)):
    cells = []
    for p in params:
        for s in seeds:
            k = s + 10 * (p or 0)
            m = RunMetrics(transfers=int(20 + k), hops=int(100 + 3 * k),
                           capture_times=[1 + s, 2 + s, 7], steps_elapsed=30)
            cells.append(CellResult(algorithm, p, s, m))
    return cells


def test_algorithm_binding():
    assert parse_algorithm("STS-1") == (Method.STS, Selection.NEAREST)
    assert parse_algorithm("das-2") == (Method.DAS, Selection.MIN_LOAD)
    with pytest.raises(ValueError):
        parse_algorithm("TS-3")
    assert policy_for("DAS-2", 15).d_das == 15
    with pytest.raises(ValueError):
        policy_for("STS-1")


def test_default_grids():
    assert len(ExperimentSpec("STS-1").params) == 15 and ALPHA_GRID[-1] == 1.4
    assert ExperimentSpec("DAS-2").params == DDAS_GRID == (0, 5, 10, 15, 20, 25, 30, 35, 40)
    assert ExperimentSpec("TS-1").params == (None,)
    assert ExperimentSpec("TS-1").seeds == tuple(range(20))


def test_single_seed_row_is_degenerate():
    (row,) = run_sweep(ExperimentSpec("TS-1", seeds=(3,), world=TINY))
    for stat in (row.ttc, row.hops, row.transfers):
        assert stat.min == stat.mean == stat.max
    assert row.n == 1


def test_aggregate_matches_independent_pass():
    cells = fake_cells()
    rows = aggregate(cells)
    assert [r.param for r in rows] == [0.0, 0.5]
    for row in rows:
        mine = [c for c in cells if c.param == row.param]
        ttc = [sum(c.metrics.capture_times) / len(c.metrics.capture_times) for c in mine]
        hops = [c.metrics.hops for c in mine]
        assert (row.ttc.min, row.ttc.max) == (min(ttc), max(ttc))
        assert row.ttc.mean == pytest.approx(statistics.mean(ttc), abs=1e-12)
        assert (row.hops.min, row.hops.mean, row.hops.max) == (min(hops), sum(hops) / 3, max(hops))
        assert row.ttc.min <= row.ttc.mean <= row.ttc.max


def test_seed_permutation_leaves_aggregates_unchanged():
    cells = fake_cells()
    assert aggregate(cells) == aggregate(list(reversed(cells)))
    spec = ExperimentSpec("DAS-1", (5,), (4, 1, 9), TINY)
    shuffled = ExperimentSpec("DAS-1", (5,), (9, 4, 1), TINY)
    by_seed = {c.seed: c.metrics for c in run_cells(spec)}
    assert by_seed == {c.seed: c.metrics for c in run_cells(shuffled)}
    assert run_sweep(spec) == run_sweep(shuffled)


def test_sts_zero_row_equals_ts_row():
    seeds = (0, 1, 2)
    (sts,) = run_sweep(ExperimentSpec("STS-1", (0.0,), seeds, TINY))
    (ts,) = run_sweep(ExperimentSpec("TS-1", (), seeds, TINY))
    assert (sts.ttc, sts.hops, sts.transfers, sts.n) == (ts.ttc, ts.hops, ts.transfers, ts.n)


def test_parallel_matches_serial():
    spec = ExperimentSpec("STS-2", (0.7,), (0, 1), TINY)
    assert run_sweep(spec, jobs=2) == run_sweep(spec)


def test_sweep_failure_names_the_cell():
    with pytest.raises(SweepFailure) as info:
        run_sweep(ExperimentSpec("DAS-2", (10,), (6,), TINY), max_steps=3)
    assert (info.value.algorithm, info.value.param, info.value.seed) == ("DAS-2", 10, 6)


def test_emit_csv_layout(tmp_path):
    rows = aggregate(fake_cells(params=(0.0, 0.5, 1.0)))
    path = emit_csv(rows, tmp_path / "out.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "algorithm,param,metric,min,mean,max,n"
    assert len(lines) == 1 + 9
    assert [line.split(",")[2] for line in lines[1:4]] == ["ttc", "hops", "transfers"]
    assert lines[2] == "STS-1,0,hops,100,103,106,3"
    first_ttc = lines[1].split(",")
    # per-seed means 10/3, 12/3, 14/3
    assert first_ttc[3:6] == ["3.33333", "4", "4.66667"]


def test_emit_csv_ts_row_and_determinism(tmp_path):
    rows = run_sweep(ExperimentSpec("TS-1", seeds=(1,), world=TINY))
    a = emit_csv(rows, tmp_path / "a.csv").read_bytes()
    b = emit_csv(rows, tmp_path / "b.csv").read_bytes()
    assert a == b
    assert len(a.decode().splitlines()) == 4
    assert a.decode().splitlines()[1].startswith("TS-1,,ttc,")
    with pytest.raises(ValueError):
        emit_csv([], tmp_path / "c.csv")


def test_emit_scatter_series(tmp_path):
    rows = aggregate(fake_cells("STS-1", params=ALPHA_GRID) + fake_cells("DAS-1", params=(0, 5)))
    path = emit_scatter(rows, tmp_path / "sc.csv", svg=True)
    with path.open() as fh:
        data = list(csv.DictReader(fh))
    assert {d["algorithm"] for d in data} == {"STS-1", "DAS-1"}
    assert sum(d["algorithm"] == "STS-1" for d in data) == 15
    svg = (tmp_path / "sc.svg").read_text()
    assert "<svg" in svg and "1.4" in svg
    only = emit_scatter(rows, tmp_path / "one.csv", algorithms=["sts-1"])
    assert len(only.read_text().splitlines()) == 16
    with pytest.raises(ValueError):
        emit_scatter(rows, tmp_path / "none.csv", algorithms=["TS-2"])


def test_cli_run(capsys):
    code = cli.main(["run", "--algorithm", "STS-1", "--alpha", "0.5", "--grid", "50x50",
                     "--actors", "4", "--quota", "40", "--base-seed", "2"])
    out = capsys.readouterr().out
    assert code == 0
    assert "algorithm=STS-1 param=0.5 seed=2" in out and "transfers=" in out


def test_cli_config_file_and_override(tmp_path, capsys):
    conf = tmp_path / "exp.conf"
    conf.write_text("# tiny sweep\nalgorithm = DAS-1\nddas = 0,40\ngrid = 50x50\nactors = 4\n"
                    "quota = 40\nseeds = 3\nbase_seed = 7\n")
    out = tmp_path / "res"
    assert cli.main(["sweep", "--config", str(conf), "--seeds", "2", "--out", str(out)]) == 0
    lines = (out / "aggregate.csv").read_text().splitlines()
    assert len(lines) == 1 + 2 * 3
    assert all(line.endswith(",2") for line in lines[1:])
    assert (out / "scatter.csv").exists() and not (out / "scatter.svg").exists()


def test_cli_exit_codes(tmp_path, capsys):
    assert cli.main(["run", "--actors", "5"]) == cli.EXIT_CONFIG
    assert cli.main(["run", "--algorithm", "FOO-1"]) == cli.EXIT_CONFIG
    assert cli.main(["run", "--grid", "fifty"]) == cli.EXIT_CONFIG
    bad = tmp_path / "bad.conf"
    bad.write_text("colour = blue\n")
    assert cli.main(["run", "--config", str(bad)]) == cli.EXIT_CONFIG
    assert cli.main(["run", "--grid", "50x50", "--actors", "4", "--max-steps", "3"]) == cli.EXIT_NONTERM
    assert cli.main(["run", "--config", str(tmp_path / "missing.conf")]) == cli.EXIT_IO
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert cli.main(["sweep", "--algorithm", "TS-1", "--grid", "50x50", "--actors", "4",
                     "--quota", "5", "--seeds", "1", "--out", str(blocker / "sub")]) == cli.EXIT_IO


def test_sweep_failure_survives_process_pool():
    spec = ExperimentSpec("DAS-2", (10,), (6,), TINY)
    with pytest.raises(SweepFailure, match="DAS-2 param=10 seed=6"):
        run_sweep(spec, jobs=2, max_steps=3)
