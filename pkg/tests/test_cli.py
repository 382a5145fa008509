import csv
import io

import pytest

from eprldpc.cli import main


@pytest.fixture(scope="module")
def code_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "g6.qalist"
    assert main(["construct", "--p", "3", "--girth", "6", "--n", "40", "--max-p", "3", "--out", str(path)]) == 0
    return path


def test_construct_writes_report(code_file, capsys):
    report = (code_file.parent / (code_file.name + ".report")).read_text()
    assert report.startswith("p: 3\n")


def test_analyze_cycle_free(tmp_path, capsys):
    out = tmp_path / "tree.qalist"
    assert main(["construct", "--dv", "1", "--dc", "2", "--n", "8", "--p", "2", "--out", str(out)]) == 0
    capsys.readouterr()
    assert main(["analyze", "--in", str(out), "--trials", "1000"]) == 0
    first = capsys.readouterr().out.splitlines()[0]
    assert first == "girth: 0 (cycle-free)"


def test_analyze_girth(code_file, capsys):
    capsys.readouterr()
    assert main(["analyze", "--in", str(code_file), "--trials", "2000"]) == 0
    text = capsys.readouterr().out
    g = int(text.splitlines()[0].split(":")[1])
    assert g >= 6
    assert "p4:" in text and "mother lambda (edge)" in text


def test_sweep_csv(code_file, tmp_path, capsys):
    svg = tmp_path / "p.svg"
    capsys.readouterr()
    rc = main(["sweep", "--in", str(code_file), "--decoder", "sepr", "--mu", "16", "--nu", "4",
               "--grid", "1.0,2.0,3.0", "--min-errors", "2", "--max-frames", "10", "--mode", "extended",
               "--plot", str(svg)])
    assert rc == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0][0] == "channel_param"
    assert len(rows) == 4
    assert svg.read_text().lstrip().startswith("<?xml")


def test_sweep_worker_count_irrelevant(code_file, tmp_path):
    outs = []
    for w in ("1", "2"):
        path = tmp_path / f"w{w}.csv"
        assert main(["sweep", "--in", str(code_file), "--decoder", "seb", "--grid", "1.0,2.0",
                     "--min-errors", "3", "--max-frames", "30", "--seed", "5", "--workers", w,
                     "--batch", "4", "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_config_file_and_override(code_file, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"# sweep settings\nin = {code_file}\ndecoder = seb\ngrid = 1.0\nmax-frames = 6\n"
                   "min_errors = 100\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", "--config", str(cfg), "--out", str(a)]) == 0
    assert main(["sweep", "--config", str(cfg), "--max-frames", "3", "--out", str(b)]) == 0
    assert list(csv.reader(io.StringIO(a.read_text())))[1][1] == "6"
    assert list(csv.reader(io.StringIO(b.read_text())))[1][1] == "3"


def test_verify(tmp_path, capsys):
    out = tmp_path / "v.txt"
    assert main(["verify", "--trials", "20000", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines and all(ln.startswith("PASS") for ln in lines)


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["sweep", "--bogus"],
    ["sweep", "--decoder", "magic"],
    ["analyze"],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == 1


def test_bad_config_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    assert main(["verify", "--config", str(cfg)]) == 1


def test_io_errors(tmp_path):
    assert main(["analyze", "--in", str(tmp_path / "missing.qalist")]) == 2
    broken = tmp_path / "broken.qalist"
    broken.write_text("qalist v1\np 2\n")
    assert main(["analyze", "--in", str(broken)]) == 2


def test_plan_error_is_usage(code_file):
    assert main(["sweep", "--in", str(code_file), "--decoder", "seb", "--mode", "extended",
                 "--grid", "1.0"]) == 1


def test_construct_failure_exit(tmp_path):
    assert main(["construct", "--p", "2", "--girth", "20", "--n", "20", "--max-p", "3",
                 "--out", str(tmp_path / "x")]) == 3
