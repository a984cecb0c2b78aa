import csv
import io
import math

import pytest

from invperc.cli import main, parse_k_rule, read_config

LOLLIPOP = "6 6\n1 2 0.1\n2 3 0.2\n3 4 0.3\n4 5 0.4\n1 5 0.5\n1 6 0.6\n"
BOWTIE = "5 6\n1 2 0.1\n2 3 0.2\n1 3 0.3\n3 4 0.4\n4 5 0.5\n3 5 0.6\n"
TREE = "4 3\n1 2 0.1\n2 3 0.2\n3 4 0.3\n"


def run(capsys, *argv):
    status = main(list(argv))
    return status, capsys.readouterr().out


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_k_rules():
    assert parse_k_rule("fixed:3")(10) == 3
    assert parse_k_rule("pow:1,1/3")(1000) == 10
    assert parse_k_rule("pow:20,1/3")(10**5) == math.ceil(20 * 10 ** (5 / 3))
    assert parse_k_rule("pow:1,1/3")(100) == 5
    for bad in ("fixed:x", "pow:1", "linear:2"):
        with pytest.raises(ValueError):
            parse_k_rule(bad)
    with pytest.raises(ValueError):
        parse_k_rule("fixed:11")(10)


def test_phase_scan_extremes(capsys):
    status, out = run(capsys, "phase-scan", "--n", "100", "--k-rule", "fixed:1", "--k-rule", "fixed:100", "--replicates", "5", "--seed", "1", "--workers", "1")
    assert status == 0
    got = rows(out)
    assert [(r["k"], float(r["mean"])) for r in got] == [("1", 1.0), ("100", 0.01)]
    assert all(r["lambda"] == "" and r["seed"] == "1" and r["replicates"] == "5" for r in got)


def test_phase_scan_is_deterministic_across_workers(capsys):
    argv = ["phase-scan", "--n", "200,300", "--k-rule", "pow:1,1/3", "--k-rule", "fixed:2", "--replicates", "6", "--seed", "4"]
    _, a = run(capsys, *argv, "--workers", "1")
    _, b = run(capsys, *argv, "--workers", "1")
    _, c = run(capsys, *argv, "--workers", "3")
    assert a == b == c
    assert [(r["n"], r["k"]) for r in rows(a)] == [("200", "2"), ("200", "6"), ("300", "2"), ("300", "7")]


def test_critical_scan_rows_and_determinism(capsys):
    argv = ["critical-scan", "--n", "1000", "--lambda", "0", "--lambda", "1", "--i", "0,1", "--k-rule", "fixed:1", "--replicates", "4", "--seed", "2"]
    status, a = run(capsys, *argv, "--workers", "1")
    _, b = run(capsys, *argv, "--workers", "2")
    assert status == 0 and a == b
    got = rows(a)
    assert [(r["lambda"], r["i"]) for r in got] == [("0.0", "0"), ("0.0", "1"), ("1.0", "0"), ("1.0", "1")]
    # with one source, i=0 and i=1 both give the largest window component
    assert got[0]["mean"] == got[1]["mean"]


def test_critical_scan_rejects_p_out_of_range(capsys):
    status = main(["critical-scan", "--n", "100", "--lambda", "1e6", "--k-rule", "fixed:1", "--seed", "1"])
    assert status == 2
    assert "outside (0, 1)" in capsys.readouterr().err


def test_bad_k_exits_two(capsys):
    assert main(["phase-scan", "--n", "10", "--k-rule", "fixed:11", "--seed", "1"]) == 2
    assert main(["phase-scan", "--n", "10", "--k-rule", "nonsense", "--seed", "1"]) == 2


def test_missing_seed_and_env_fallback(capsys, monkeypatch):
    monkeypatch.delenv("PERC_SEED", raising=False)
    assert main(["linebreak", "--samples", "2"]) == 2
    monkeypatch.setenv("PERC_SEED", "17")
    status, out = run(capsys, "linebreak", "--samples", "2")
    _, explicit = run(capsys, "linebreak", "--samples", "2", "--seed", "17")
    assert status == 0 and out == explicit
    assert rows(out)[0]["seed"] == "17"


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep\nn = 100\nk_rule = fixed:1; fixed:100\nreplicates = 3\nseed = 5\nworkers = 1\n")
    assert read_config(cfg)["k-rule"] == ["fixed:1", "fixed:100"]
    _, from_file = run(capsys, "phase-scan", "--config", str(cfg))
    assert [r["k"] for r in rows(from_file)] == ["1", "100"]
    _, flagged = run(capsys, "phase-scan", "--config", str(cfg), "--seed", "6", "--k-rule", "fixed:2")
    got = rows(flagged)
    assert [r["k"] for r in got] == ["2"] and got[0]["seed"] == "6" and got[0]["replicates"] == "3"


def test_out_file(tmp_path, capsys):
    out = tmp_path / "rows.csv"
    assert main(["linebreak", "--r", "1", "--samples", "3", "--seed", "1", "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    assert out.read_text().startswith("sample,r,seed,pi_0,pi_1,u1,u3\n")


def test_decompose_lollipop(tmp_path, capsys):
    path = tmp_path / "g.txt"
    path.write_text(LOLLIPOP)
    status, out = run(capsys, "decompose", "--graph", str(path))
    assert status == 0
    assert out.splitlines() == ["object_type,id,mass", "vertex,1,1", "vertex,6,1", "loop,1-1:0,4", "edge,1-6:0,0"]


def test_decompose_bowtie(tmp_path, capsys):
    path = tmp_path / "g.txt"
    path.write_text(BOWTIE)
    _, out = run(capsys, "decompose", "--graph", str(path))
    got = rows(out)
    assert [r["object_type"] for r in got] == ["vertex", "loop", "loop"]
    assert [int(r["mass"]) for r in got] == [1, 2, 2]
    assert sum(int(r["mass"]) for r in got) == 5


def test_decompose_rejects_trees_and_disconnected_graphs(tmp_path, capsys):
    path = tmp_path / "g.txt"
    path.write_text(TREE)
    assert main(["decompose", "--graph", str(path)]) == 2
    path.write_text("4 2\n1 2 0.1\n3 4 0.2\n")
    assert main(["decompose", "--graph", str(path)]) == 2
    assert main(["decompose", "--graph", str(tmp_path / "missing.txt")]) == 2


def test_linebreak_without_branches(capsys):
    _, out = run(capsys, "linebreak", "--r", "0", "--samples", "3", "--seed", "1")
    lines = out.splitlines()
    assert lines[0] == "sample,r,seed,pi_0,u1,u3"
    assert all(line.endswith(",,") for line in lines[1:])


def test_linebreak_pi0_law(capsys):
    _, out = run(capsys, "linebreak", "--r", "0", "--samples", "10000", "--seed", "3")
    pi0 = [float(r["pi_0"]) for r in rows(out)]
    frac = sum(x <= math.sqrt(2) for x in pi0) / len(pi0)
    assert abs(frac - (1 - math.exp(-1))) < 0.02


def test_linebreak_sets(capsys):
    _, out = run(capsys, "linebreak", "--r", "5", "--samples", "50", "--seed", "3")
    got = rows(out)
    assert all(0 <= int(r["u1"]) <= 5 and 0 <= int(r["u3"]) <= 5 for r in got)
    assert len(got[0]) == 3 + 6 + 2


def test_trace_command(tmp_path, capsys):
    path = tmp_path / "g.txt"
    path.write_text("4 3\n1 2 0.1\n2 3 0.5\n3 4 0.2\n")
    _, out = run(capsys, "trace", "--graph", str(path), "--sources", "1,4")
    assert out.splitlines() == [
        "step,edge_u,edge_v,weight,verdict",
        "1,1,2,0.1,accepted",
        "2,3,4,0.2,accepted",
        "3,2,3,0.5,rejected-source-merge",
    ]
    _, er = run(capsys, "trace", "--graph", str(path), "--sources", "1", "--process", "er")
    assert er.count("accepted") == 3


def test_unknown_suite_exits_two():
    assert main(["verify", "--suite", "nope"]) == 2


def test_usage_error_exits_two():
    assert main(["no-such-command"]) == 2
