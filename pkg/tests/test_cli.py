import json

import pytest

from petvote.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def last_json(out):
    return json.loads(out.strip().splitlines()[-1])


@pytest.fixture
def election_dir(tmp_path, capsys):
    d = str(tmp_path / "el")
    code, _ = run_cli(
        capsys, "setup", "--dir", d, "--voters", "3", "--options", "2",
        "--code-bits", "3", "--code-space", "8", "--lam", "4", "--seed", "cli-test",
    )
    assert code == 0
    code, _ = run_cli(capsys, "register", "--dir", d)
    assert code == 0
    return d


def sheets_of(election_dir):
    with open(f"{election_dir}/sheets.json") as fh:
        return {s["voter_id"]: s for s in json.load(fh)}


def test_full_cli_flow(election_dir, capsys):
    sheets = sheets_of(election_dir)
    sheet = sheets["V000"]

    code, out = run_cli(capsys, "cast", "--dir", election_dir, "--voter", "V000", "--choices", "1,0")
    assert code == 0
    cast = last_json(out)
    assert cast["state"] == "codes-sent"
    assert cast["return_codes"] == [
        sheet["return_codes"][0][1],
        sheet["return_codes"][1][0],
    ]

    code, out = run_cli(
        capsys, "finalize", "--dir", election_dir, "--voter", "V000",
        "--code", sheet["finalization_code"],
    )
    assert code == 0
    assert last_json(out)["confirmation"] == sheet["confirmation_code"]

    code, out = run_cli(capsys, "tally", "--dir", election_dir)
    assert code == 0
    result = last_json(out)
    assert result["counts"] == [1, 0]
    assert result["ballots"] == 1

    code, out = run_cli(capsys, "verify", "--dir", election_dir)
    assert code == 0
    assert "FAIL" not in out


def test_cli_wrong_auth_rejected(election_dir, capsys):
    code, out = run_cli(
        capsys, "cast", "--dir", election_dir, "--voter", "V001", "--choices", "0,0",
        "--auth", "bogus",
    )
    assert code == 1
    assert last_json(out)["status"] == "rejected"


def test_cli_wrong_finalization_code(election_dir, capsys):
    run_cli(capsys, "cast", "--dir", election_dir, "--voter", "V001", "--choices", "0,1")
    code, out = run_cli(
        capsys, "finalize", "--dir", election_dir, "--voter", "V001", "--code", "nope"
    )
    assert code == 1
    assert last_json(out)["status"] == "rejected"


def test_cli_cheat_flip_cancelled(election_dir, capsys):
    code, out = run_cli(
        capsys, "cast", "--dir", election_dir, "--voter", "V002", "--choices", "1,1",
        "--cheat-flip", "1",
    )
    assert code == 1
    assert last_json(out)["state"] == "cancelled"


def test_cli_verify_detects_tamper(election_dir, capsys, tmp_path):
    board_path = f"{election_dir}/board.log"
    raw = bytearray(open(board_path, "rb").read())
    raw[len(raw) // 3] ^= 0x02
    open(board_path, "wb").write(bytes(raw))
    code, out = run_cli(capsys, "verify", "--dir", election_dir)
    assert code == 1


def test_cli_verify_requires_target(capsys):
    code = main(["verify"])
    assert code == 2


def test_cli_experiment_cai(capsys):
    code, out = run_cli(
        capsys, "experiment", "cai", "--trials", "60", "--seed", "cli-cai", "--lam", "2"
    )
    assert code == 0
    report = last_json(out)
    assert report["experiment"] == "cast-as-intended"
    assert report["trials"] == 60
    assert report["passed"] is True


def test_cli_experiment_privacy(capsys):
    code, out = run_cli(
        capsys, "experiment", "privacy", "--trials", "15", "--seed", "cli-priv",
        "--voters", "3", "--corrupt-voters", "1", "--code-space", "8", "--code-bits", "3",
    )
    assert code == 0
    lines = [json.loads(line) for line in out.strip().splitlines()]
    assert any(r.get("distinguisher") == "sheet-access" and r["advantage"] == 1.0 for r in lines)
    assert lines[-1]["passed"] is True


def test_cli_attack_demo(capsys):
    code, out = run_cli(capsys, "attack-demo", "--seed", "cli-attack")
    assert code == 0
    report = last_json(out)
    assert report["attack_succeeds"] is True
    assert report["countermeasure_accepts_malicious"] is False
