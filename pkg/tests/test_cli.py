import json
import os
import pytest

from prmeasures.cli import main
from prmeasures.sequence import BinarySequence, read_sequence, write_sequence


def run(*argv):
    return main([str(a) for a in argv])


def usage_error(*argv):
    with pytest.raises(SystemExit) as info:
        run(*argv)
    return info.value.code


def test_generate_legendre_family(tmp_path, capsys):
    assert run("generate", "legendre", "--p", 1009, "--poly", "x^3+i", "--count", 3,
               "--out", tmp_path) == 0
    files = sorted(p.name for p in tmp_path.iterdir())
    assert files == ["manifest.json", "seq_1", "seq_2", "seq_3"]
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["sequences"][1]["spec"]["f"] == [2, 0, 0, 1]
    assert len(read_sequence(tmp_path / "seq_1", "ascii")) == 1009


def test_generate_other_kinds(tmp_path):
    assert run("generate", "inverse", "--p", 1019, "--half", "--out", tmp_path / "inv") == 0
    assert len(read_sequence(tmp_path / "inv" / "seq_1", "ascii")) == 510
    assert run("generate", "ec", "--p", 5, "--a", 1, "--b", 1, "--gx", 0, "--gy", 1,
               "--order", 9, "--function", "x", "--out", tmp_path / "ec") == 0
    assert len(read_sequence(tmp_path / "ec" / "seq_1", "ascii")) == 9
    assert run("generate", "thue-morse", "--length", 64, "--format", "packed",
               "--out", tmp_path / "tm") == 0
    assert len(read_sequence(tmp_path / "tm" / "seq_1", "packed")) == 64
    assert run("generate", "periodic", "--pattern", "+--+", "--reps", 4,
               "--out", tmp_path / "per") == 0
    assert read_sequence(tmp_path / "per" / "seq_1", "ascii").tolist()[:4] == [1, -1, -1, 1]


def test_generate_usage_errors(tmp_path):
    assert usage_error("generate", "legendre", "--out", tmp_path) == 2
    assert usage_error("generate", "mystery", "--out", tmp_path) == 2
    assert usage_error("generate", "periodic", "--pattern", "+x", "--reps", 2, "--out", tmp_path) == 2
    assert usage_error("generate", "legendre", "--p", 15, "--out", tmp_path) == 2
    assert run("generate", "--manifest", tmp_path / "none.json", "--out", tmp_path) == 3


def test_manifest_replay(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run("generate", "legendre", "--p", 1009, "--count", 2, "--start", 5, "--out", a)
    assert run("generate", "--manifest", a / "manifest.json", "--out", b) == 0
    for name in ("seq_5", "seq_6", "manifest.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_measure(tmp_path, capsys):
    path = tmp_path / "s"
    write_sequence(path, "ascii", BinarySequence([1, -1] * 8))
    assert run("measure", path, "--measures", "W,C2") == 0
    recs = [json.loads(ln) for ln in capsys.readouterr().out.splitlines()]
    assert recs[0]["measure"] == "W" and recs[0]["value"] == 8 and recs[0]["exact"]
    assert recs[0]["witness"] == {"a": 1, "b": 2, "t": 8}
    assert run("measure", path, "--measures", "C2", "--d-max", 8, "--out", tmp_path / "m") == 0
    rec = json.loads((tmp_path / "m").read_text())
    assert rec["exact"] is False and rec["d_max"] == 8
    assert run("measure", tmp_path / "missing") == 3
    assert usage_error("measure", path, "--measures", "W2") == 2


def test_measure_periodic_q4(tmp_path, capsys):
    run("generate", "periodic", "--pattern", "+--+", "--reps", 250, "--out", tmp_path)
    assert run("measure", tmp_path / "seq_1", "--measures", "Q4", "--b-max", 4, "--d-max", 3) == 0
    rec = json.loads(capsys.readouterr().out.splitlines()[-1])
    assert rec["value"] >= 1000 / 4


def test_test_command(tmp_path, capsys):
    fam = tmp_path / "fam"
    run("generate", "legendre", "--p", 2003, "--poly", "x^3+i", "--count", 3, "--out", fam)
    out = tmp_path / "out"
    code = run("test", *sorted(fam.glob("seq_*")), "--out", out)
    assert code in (0, 1)
    text = (out / "report.txt").read_text()
    assert "monobit" in text and "dft" in text
    rows = [json.loads(ln) for ln in (out / "report.jsonl").read_text().splitlines()]
    assert [r["test"] for r in rows] == ["monobit", "block_frequency", "longest_run",
                                         "linear_complexity", "dft"]
    assert len((out / "results.jsonl").read_text().splitlines()) == 15
    man = json.loads((out / "manifest.json").read_text())
    assert len(man["inputs"]) == 3 and "timestamp" not in json.dumps(man)


def test_test_flags_thue_morse(tmp_path):
    run("generate", "thue-morse", "--length", 20000, "--out", tmp_path)
    assert run("test", tmp_path / "seq_1", "--out", tmp_path / "o") == 1
    row = [json.loads(ln) for ln in (tmp_path / "o" / "report.jsonl").read_text().splitlines()][-1]
    assert row["test"] == "dft" and row["passed"] == 0 and row["proportion_flag"]


def test_test_errors(tmp_path):
    assert usage_error("test") == 2
    assert run("test", tmp_path / "missing") == 3
    run("generate", "thue-morse", "--length", 2000, "--out", tmp_path)
    assert run("test", tmp_path / "seq_1", tmp_path / "missing") == 3
    cfg = tmp_path / "cfg"
    cfg.write_text("beta = 1\n")
    assert usage_error("test", tmp_path / "seq_1", "--config", cfg) == 2
    assert usage_error("test", tmp_path / "seq_1", "--alpha", 3) == 2
    cfg.write_text("tests = monobit\nalpha = 0.05\n")
    assert run("test", tmp_path / "seq_1", "--config", cfg) == 0


def test_verify_command(tmp_path, capsys):
    assert run("verify", "bw", "--out", tmp_path) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[1].split()[:2] == ["bw", "5096"]
    recs = (tmp_path / "checks.jsonl").read_text().splitlines()
    assert len(recs) == 5096
    assert usage_error("verify", "riemann") == 2


def test_deterministic_across_threads(tmp_path):
    outs = []
    for threads in (1, 3):
        d = tmp_path / f"t{threads}"
        run("generate", "legendre", "--p", 2003, "--count", 4, "--threads", threads, "--out", d / "gen")
        files = sorted((d / "gen").glob("seq_*"))
        rel = [f.relative_to(tmp_path / f"t{threads}") for f in files]
        cwd = os.getcwd()
        os.chdir(d)
        try:
            run("test", *rel, "--threads", threads, "--out", "res")
            run("verify", "nk-chain", "--threads", threads, "--out", "ver")
        finally:
            os.chdir(cwd)
        outs.append({str(p.relative_to(d)): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()})
    assert outs[0] == outs[1]
