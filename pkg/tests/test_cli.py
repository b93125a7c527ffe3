import subprocess
import sys
from pathlib import Path

import pytest

from seqnn.harness.cli import EXIT_CHECK, EXIT_CONFIG, EXIT_IO, EXIT_OK, main

CORPUS = Path(__file__).resolve().parents[1] / "data" / "tiny_corpus.txt"


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gradcheck_subset_passes(capsys):
    code, out, _ = run(["gradcheck", "--arch", "linear", "lstm"], capsys)
    assert code == EXIT_OK
    assert "2/2 passed" in out


def test_gradcheck_corrupt_hook_fails(capsys):
    code, out, _ = run(["gradcheck", "--arch", "linear", "--corrupt"], capsys)
    assert code == EXIT_CHECK
    assert out.startswith("FAIL")


def test_train_copy_writes_csv(tmp_path, capsys):
    out = tmp_path / "m.csv"
    code, _, _ = run(["train", "--task", "copy", "--epochs", "2", "--hidden", "8", "--out", str(out)], capsys)
    assert code == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "epoch,split,loss,perplexity,accuracy,wallclock_ms"
    assert len(lines) == 5


def test_train_save_then_eval_reproduces_valid_row(tmp_path, capsys):
    model = tmp_path / "lm.bin"
    code, train_out, _ = run(["train", "--data", str(CORPUS), "--epochs", "1", "--hidden", "8",
                              "--save", str(model)], capsys)
    assert code == EXIT_OK
    code, eval_out, _ = run(["eval", "--load", str(model), "--data", str(CORPUS)], capsys)
    assert code == EXIT_OK
    assert eval_out.splitlines()[1] == train_out.splitlines()[-1]


def test_train_timing_fills_wallclock(capsys):
    _, out, _ = run(["train", "--task", "copy", "--epochs", "1", "--hidden", "4", "--timing"], capsys)
    assert out.splitlines()[1].split(",")[-1] != ""


def test_serialize_roundtrip_command(tmp_path, capsys):
    model = tmp_path / "c.bin"
    run(["train", "--task", "copy", "--epochs", "1", "--hidden", "4", "--save", str(model)], capsys)
    code, out, _ = run(["serialize-roundtrip", "--load", str(model)], capsys)
    assert code == EXIT_OK
    assert "FAIL" not in out


@pytest.mark.parametrize("argv", [
    ["train", "--task", "charlm"],
    ["train", "--task", "copy", "--hidden", "0"],
    ["train", "--task", "copy", "--lr", "-1"],
])
def test_config_errors_exit_2(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == EXIT_CONFIG
    assert "config error" in err


def test_single_symbol_corpus_is_config_error(tmp_path, capsys):
    path = tmp_path / "a.txt"
    path.write_text("aaaa")
    assert run(["train", "--data", str(path)], capsys)[0] == EXIT_CONFIG


def test_io_errors_exit_3(tmp_path, capsys):
    assert run(["train", "--data", str(tmp_path / "missing.txt")], capsys)[0] == EXIT_IO
    assert run(["eval", "--load", str(tmp_path / "missing.bin")], capsys)[0] == EXIT_IO
    junk = tmp_path / "junk.bin"
    junk.write_bytes(b"garbage")
    assert run(["eval", "--load", str(junk)], capsys)[0] == EXIT_IO


def test_bad_flag_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["train", "--model", "gru"])
    assert info.value.code == 2


def test_console_entry_point_runs():
    proc = subprocess.run([sys.executable, "-m", "seqnn.harness.cli", "gradcheck", "--arch", "linear"],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
