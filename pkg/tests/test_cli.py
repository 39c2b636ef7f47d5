import json

import pytest

from restartfa.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_build_writes_spec_file(tmp_path, capsys):
    out = tmp_path / "machine.json"
    code, stdout, _ = run_cli(capsys, "zoo", "build", "--family", "am", "--m", "1",
                              "--eps", "0.25", "--out", str(out))
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["kind"] == "quantum"
    assert len(doc["state_labels"]) == 6
    assert "am(m=1,eps=0.25)" in stdout


@pytest.fixture()
def spec_file(tmp_path, capsys):
    out = tmp_path / "machine.json"
    main(["zoo", "build", "--family", "am", "--m", "1", "--eps", "0.25",
          "--out", str(out)])
    capsys.readouterr()
    return out


def test_eval_csv(spec_file, capsys):
    code, stdout, _ = run_cli(capsys, "eval", "--spec", str(spec_file),
                              "--words", ",a,ba", "--language", "suffix",
                              "--m", "1", "--eps", "0.25")
    assert code == 0
    lines = stdout.strip().split("\n")
    assert lines[0].startswith("machine,word,p_acc")
    assert len(lines) == 4
    assert lines[2].split(",")[1] == "a"
    assert all(line.endswith("pass") for line in lines[1:])


def test_eval_json_deterministic(spec_file, capsys):
    args = ("eval", "--spec", str(spec_file), "--max-len", "2", "--format", "json")
    code1, out1, _ = run_cli(capsys, *args)
    code2, out2, _ = run_cli(capsys, *args)
    assert code1 == code2 == 0
    assert out1 == out2
    assert len(json.loads(out1)) == 7


def test_eval_unknown_symbol_exits_2(spec_file, capsys):
    code, _, stderr = run_cli(capsys, "eval", "--spec", str(spec_file),
                              "--words", "xyz")
    assert code == 2
    assert "outside the machine alphabet" in stderr


def test_missing_spec_file_exits_2(capsys):
    code, _, stderr = run_cli(capsys, "eval", "--spec", "/nonexistent.json",
                              "--words", "a")
    assert code == 2
    assert "not found" in stderr


def test_truncated_spec_file_exits_2(spec_file, capsys):
    text = spec_file.read_text()
    spec_file.write_text(text[: len(text) // 3])
    code, _, stderr = run_cli(capsys, "eval", "--spec", str(spec_file),
                              "--words", "a")
    assert code == 2
    assert "parse error" in stderr


def test_sample_byte_identical(spec_file, capsys):
    args = ("sample", "--spec", str(spec_file), "--word", "a",
            "--n", "20000", "--seed", "7")
    code1, out1, _ = run_cli(capsys, *args)
    code2, out2, _ = run_cli(capsys, *args)
    assert code1 == code2 == 0
    assert out1 == out2
    header, values = out1.strip().split("\n")
    assert header.split(",")[0] == "n"
    assert values.split(",")[0] == "20000"


def test_sweep(capsys):
    code, stdout, _ = run_cli(capsys, "sweep", "--family", "leq-pfa",
                              "--eps", "0.2,0.3", "--max-len", "2")
    assert code == 0
    lines = stdout.strip().split("\n")
    assert len(lines) == 1 + 2 * 7


def test_verify_single_check_passes(capsys):
    code, stdout, _ = run_cli(capsys, "verify", "--checks", "4")
    assert code == 0
    assert "[PASS] 4" in stdout


def test_verify_family(capsys):
    code, stdout, _ = run_cli(capsys, "verify", "--family", "bm", "--m", "3",
                              "--eps", "0.1")
    assert code == 0
    assert stdout.count("[PASS]") == 2


def test_verify_published_gaps_fail_honestly(capsys):
    code, stdout, _ = run_cli(capsys, "verify", "--checks", "3a,3b")
    assert code == 1
    assert "[FAIL] 3a" in stdout
    assert "[PASS] 3b" in stdout


def test_argparse_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["zoo", "build", "--family", "nonsense", "--eps", "0.1"])
    assert exc.value.code == 2
