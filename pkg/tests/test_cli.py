import json
import shutil
import time
from pathlib import Path

import pytest

from krauskge.cli import main

TINY = Path(__file__).resolve().parents[1] / "data" / "tiny"


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    d = tmp_path_factory.mktemp("tiny")
    for f in TINY.iterdir():
        shutil.copy(f, d / f.name)
    t0 = time.perf_counter()
    assert main(["train", str(d / "tiny.cfg"), "--out", str(d / "m.kge"),
                 "--log", str(d / "log.jsonl")]) == 0
    return d, time.perf_counter() - t0


def test_train_fast_and_logged(trained):
    d, seconds = trained
    assert seconds < 60
    lines = [json.loads(x) for x in (d / "log.jsonl").read_text().splitlines()]
    assert lines[0]["epoch"] == 1 and len(lines) == 60


def test_train_deterministic(trained, tmp_path):
    d, _ = trained
    out = tmp_path / "again.kge"
    assert main(["train", str(d / "tiny.cfg"), "--out", str(out), "--log", str(tmp_path / "l")]) == 0
    assert out.read_bytes() == (d / "m.kge").read_bytes()


def test_eval(trained, capsys):
    d, _ = trained
    assert main(["eval", str(d / "m.kge"), "--stratify"]) == 0
    out = capsys.readouterr().out
    assert "MRR" in out and "test" in out
    assert main(["eval", str(d / "m.kge"), "--raw", "--split", "valid"]) == 0


def test_diagnose(trained, capsys, tmp_path):
    d, _ = trained
    assert main(["diagnose", str(d / "m.kge")]) == 0
    cap = capsys.readouterr()
    assert cap.out.splitlines()[0].startswith("relation\tF\tkappa_eff")
    assert len(cap.out.splitlines()) == 4 and "spearman" in cap.err
    assert main(["diagnose", str(d / "m.kge"), "--tsv", str(tmp_path / "x.tsv")]) == 0
    assert (tmp_path / "x.tsv").read_text().count("\n") == 4


def test_compose(trained, capsys):
    d, _ = trained
    assert main(["compose", str(d / "m.kge"), "fwd", "back"]) == 0
    out = dict(line.split("\t") for line in capsys.readouterr().out.splitlines())
    assert out["kappa_total"] == "4" and float(out["completeness_residual"]) <= 1e-10
    assert main(["compose", str(d / "m.kge"), "fwd", "back", "hub", "--max-kappa", "4"]) == 3
    assert main(["compose", str(d / "m.kge"), "nosuch"]) == 2


def test_verify_and_fault(capsys):
    assert main(["verify", "--scale", "0.02"]) == 0
    assert "8/8 property checks passed" in capsys.readouterr().out
    assert main(["verify", "--scale", "0.02", "--inject-fault"]) == 1
    assert "FAIL completeness" in capsys.readouterr().out


def test_recover(capsys):
    assert main(["recover", "distmult", "--trials", "50"]) == 0
    out = dict(line.split("\t") for line in capsys.readouterr().out.splitlines())
    assert float(out["max_deviation"]) <= 1e-10
    assert main(["recover", "transe"]) == 2


def test_input_errors(tmp_path, capsys):
    assert main(["train", str(tmp_path / "absent.cfg")]) == 2
    assert "absent.cfg" in capsys.readouterr().err
    (tmp_path / "bad.kge").write_bytes(b"garbage")
    assert main(["eval", str(tmp_path / "bad.kge")]) == 2


def test_thread_env(monkeypatch, capsys):
    monkeypatch.setenv("KRAUSKGE_THREADS", "1")
    assert main(["recover", "rescal", "--trials", "5"]) == 0
    monkeypatch.setenv("KRAUSKGE_THREADS", "many")
    assert main(["recover", "rescal", "--trials", "5"]) == 2
