import re
from pathlib import Path

import pytest

from constructibility.cli import main

CORPUS = sorted(Path(__file__).parent.joinpath("data", "corpus").glob("*.cst"))
BUNDLED = ["diameter_chord.cst", "trapezoid_axes.cst", "polar_pole.cst", "force_on_circle.cst",
           "parallel_flip.cst", "between_flip.cst"]


@pytest.mark.parametrize("path", [str(p) for p in CORPUS] + [f"bundled:{n}" for n in BUNDLED])
def test_check_corpus(path, capsys):
    assert main(["check", path]) == 0
    assert "ok" in capsys.readouterr().out


def test_check_reports_errors(tmp_path, capsys):
    bad = tmp_path / "bad.cst"
    bad.write_text("given A;\nlet l = join(A);\n")
    assert main(["check", str(bad)]) == 1
    assert ":2:9:" in capsys.readouterr().out
    undefined = tmp_path / "undef.cst"
    undefined.write_text("given A, B;\nlet l = join(A, C);\n")
    assert main(["check", str(undefined)]) == 1


def test_play_then_replay(tmp_path, capsys):
    trace = tmp_path / "t.trace"
    assert main(["play", "bundled:force_on_circle.cst", "--trace", str(trace)]) == 0
    assert main(["replay", str(trace)]) == 0
    assert "identical" in capsys.readouterr().out


def test_tampered_replay_fails(tmp_path, capsys):
    trace = tmp_path / "t.trace"
    main(["play", "bundled:force_on_circle.cst", "--trace", str(trace)])
    text = trace.read_text()
    trace.write_text(text.replace("outcome lost", "outcome won"))
    assert main(["replay", str(trace)]) == 1


def test_play_center_script_against_pullback(capsys):
    code = main(["play", "bundled:trapezoid_axes.cst", "--adversary", "pullback:3/5,0", "--target", "(0, 0)",
                 "--max-moves", "200"])
    assert code == 0
    assert "(not won)" in capsys.readouterr().out


def test_closure_stats(tmp_path, capsys):
    cfg = tmp_path / "seed.cfg"
    cfg.write_text("configuration v1\n0 point [0:0:1]\n1 point [1:0:1]\n2 point [0:1:1]\n3 point [2:3:1]\nend\n")
    stats = tmp_path / "stats.csv"
    assert main(["closure", str(cfg), "--depth", "3", "--ops", "join,meet", "--stats", str(stats)]) == 0
    assert stats.read_text() == "depth,points,lines,conics\n0,4,0,0\n1,4,6,0\n2,7,6,0\n3,7,9,0\n"
    assert main(["closure", str(cfg), "--depth", "9", "--ops", "join,meet", "--max-objects", "300"]) == 1
    assert "exceeded" in capsys.readouterr().err


def test_probe(tmp_path, capsys):
    cfg = tmp_path / "seed.cfg"
    cfg.write_text("configuration v1\n0 point [0:0:1]\n1 point [1:0:1]\n2 point [0:1:1]\n3 point [2:3:1]\nend\n")
    assert main(["probe", str(cfg), "--target", "(1/3, 1/7)", "--eps", "1/1000"]) == 0
    assert "depth 18" in capsys.readouterr().out


def test_transform_and_diverge(tmp_path, capsys):
    trace = tmp_path / "t.trace"
    main(["play", "bundled:force_on_circle.cst", "--trace", str(trace)])
    capsys.readouterr()
    assert main(["transform", str(trace), "--u", "3/5", "--t", "1/2"]) == 0
    assert "verdict valid" in capsys.readouterr().out
    assert main(["diverge", "bundled:parallel_flip.cst", "--u", "3/5", "--config", "bundled:parallel_flip.cfg"]) == 0
    out = capsys.readouterr().out
    assert "original value True" in out and "transformed value False" in out


def test_derive(capsys):
    pts = ["(0, 0)", "(1, 0)", "(0, 1)", "(1, 1)"]
    assert main(["derive", *pts, "--target", "(1/2, 1/2)"]) == 0
    assert "derived at depth 2" in capsys.readouterr().out
    assert main(["derive", *pts, "--target", "(1/2, 0)"]) == 1
    assert main(["derive", *pts[:3], "--target", "(1/2, 0)"]) == 1


def test_render_precision_changes_only_digits(tmp_path):
    script = tmp_path / "slant.cst"
    script.write_text("given c; request I in disc((0, 0), 1/2); request O in disc((1, 2), 1/2);"
                      "let l = join(I, O); let A, B = intersect(l, c);")
    trace = tmp_path / "t.trace"
    main(["play", str(script), "--trace", str(trace)])
    lo, hi = tmp_path / "lo.svg", tmp_path / "hi.svg"
    assert main(["render", str(trace), "--svg", str(lo), "--precision", "24"]) == 0
    assert main(["render", str(trace), "--svg", str(hi), "--precision", "64"]) == 0
    number = re.compile(r"-?\d+(\.\d+)?")
    a, b = lo.read_text(), hi.read_text()
    assert number.sub("#", a) == number.sub("#", b)
    assert a != b


def test_usage_and_missing_file(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["play"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    assert main(["check", "/nonexistent/script.cst"]) == 1
