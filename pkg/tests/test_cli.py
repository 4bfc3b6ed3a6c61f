import json
import subprocess
import sys

import pytest

from conftest import CHECK_CORPUS, GOLDEN, RUN_CORPUS
from corocpc.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_exit_codes(capsys):
    assert run(capsys, "check", str(CHECK_CORPUS / "clean.mc"))[0] == 0
    code, out, _ = run(capsys, "check", str(CHECK_CORPUS / "fig3.mc"))
    assert code == 1 and out.count("warning:") == 5
    assert all(line.startswith(str(CHECK_CORPUS / "fig3.mc") + ":") for line in out.splitlines())


def test_check_json(capsys):
    code, out, _ = run(capsys, "check", "--json", str(CHECK_CORPUS / "fig3.mc"))
    assert code == 1 and len(json.loads(out)) == 5


def test_hybrid_note_does_not_fail(capsys):
    code, out, _ = run(capsys, "check", str(CHECK_CORPUS / "hybrid.mc"))
    assert code == 0 and "note: HybridFunction" in out


def test_renamed_attribute(capsys):
    path = str(CHECK_CORPUS / "renamed_attr.mc")
    assert run(capsys, "check", path)[0] == 2
    code, out, _ = run(capsys, "check", "--attr-name", "coro", path)
    assert code == 1 and "MissingCoroutine" in out


def test_input_errors(capsys, tmp_path):
    code, _, err = run(capsys, "check", str(tmp_path / "nope.mc"))
    assert code == 2 and "nope.mc" in err
    bad = tmp_path / "bad.mc"
    bad.write_text("int main( {")
    code, _, err = run(capsys, "check", str(bad))
    assert code == 2 and "bad.mc:1:" in err


def test_graph_dot_and_json(capsys, tmp_path):
    code, out, _ = run(capsys, "graph", str(CHECK_CORPUS / "fig3.mc"))
    assert code == 0 and out.startswith("digraph")
    target = tmp_path / "g.json"
    assert run(capsys, "graph", "--json", "--filter", "--out", str(target), str(CHECK_CORPUS / "fig3.mc"))[0] == 0
    assert "nodes" in json.loads(target.read_text())


def test_translate_stages(capsys):
    for stage in ("boxed", "normalized", "split", "lifted", "cps"):
        code, out, _ = run(capsys, "translate", "--stage", stage, str(GOLDEN / "countdown.mc"))
        assert code == 0 and "countdown" in out


def test_translate_refuses_programs_with_findings(capsys):
    code, out, err = run(capsys, "translate", str(CHECK_CORPUS / "fig3.mc"))
    assert code == 1 and out == "" and "MissingCoroutine" in err


def test_translate_refuses_hybrid(capsys, tmp_path):
    p = tmp_path / "h.mc"
    p.write_text("int where() { return in_coroutine(); } void coroutine_fn c() { print(where()); co_yield(); } int main() { return 0; }")
    code, _, err = run(capsys, "translate", str(p))
    assert code == 2 and "where" in err


def test_run_engines_agree(capsys):
    path = str(RUN_CORPUS / "my_coroutine.mc")
    code, direct, _ = run(capsys, "run", "--direct", path)
    assert code == 0 and direct == "ENTER 1\nPRINT 1\nYIELD 1\nENTER 1\nPRINT 2\nTERM 1\n"
    assert run(capsys, "run", "--cps", path)[1] == direct
    assert run(capsys, "run", "--cps", "--no-pool", path)[1] == direct


def test_run_json_and_schedule(capsys):
    code, out, _ = run(capsys, "run", "--json", "--schedule", "1", str(RUN_CORPUS / "my_coroutine.mc"))
    d = json.loads(out)
    assert code == 0 and d["status"] == "ok" and d["engine"] == "direct" and d["trace"][0] == "ENTER 1"


def test_run_translated_file(capsys, tmp_path):
    target = tmp_path / "c.mc"
    run(capsys, "translate", "--out", str(target), str(GOLDEN / "countdown.mc"))
    code, out, _ = run(capsys, "run", str(target))
    assert code == 0 and out == run(capsys, "run", str(GOLDEN / "countdown.mc"))[1]


def test_run_runtime_error_and_fuel(capsys, tmp_path):
    code, _, err = run(capsys, "run", str(RUN_CORPUS / "fault_null_call.mc"))
    assert code == 3 and "NullCall" in err
    p = tmp_path / "spin.mc"
    p.write_text("int main() { while (1) { } return 0; }")
    code, _, err = run(capsys, "run", "--fuel", "100", str(p))
    assert code == 3 and "fuel" in err


def test_difftest_command(capsys):
    code, out, _ = run(capsys, "difftest", str(RUN_CORPUS / "ping_pong.mc"))
    d = json.loads(out)
    assert code == 0 and d["passed"] and d["divergence"] is None


def test_bench_command(capsys):
    code, out, _ = run(capsys, "bench", "--bench", "yield", "--iters", "200")
    d = json.loads(out)
    assert code == 0 and d["benchmark"] == "yield" and d["counter"] == 0 and d["ns_per_op"] > 0


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "corocpc", "check", str(CHECK_CORPUS / "clean.mc")], capture_output=True, text=True)
    assert r.returncode == 0


def test_missing_subcommand():
    with pytest.raises(SystemExit):
        main([])
