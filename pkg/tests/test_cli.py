import json

import pytest

from spanprog import cli
from spanprog import monotone as mo
from spanprog import span_core as sc
from spanprog.io import pea_to_dict, save_json, span_to_dict, table_to_dict
from spanprog.query_alg import deutsch_algorithm
from spanprog.io import alg_to_dict


@pytest.fixture
def artifacts(tmp_path):
    paths = {}
    paths["or2"] = tmp_path / "or2.json"
    save_json(str(paths["or2"]), span_to_dict(sc.or_program(2)))
    paths["or2_table"] = tmp_path / "or2_table.json"
    save_json(str(paths["or2_table"]), table_to_dict(
        {x: int(any(x)) for x in sc.all_inputs(2)}, 2))
    paths["deutsch"] = tmp_path / "deutsch.json"
    save_json(str(paths["deutsch"]), alg_to_dict(deutsch_algorithm()))
    paths["xor_table"] = tmp_path / "xor_table.json"
    save_json(str(paths["xor_table"]), table_to_dict(
        {x: x[0] ^ x[1] for x in sc.all_inputs(2)}, 2))
    paths["grover2"] = tmp_path / "grover2.json"
    save_json(str(paths["grover2"]), pea_to_dict(mo.grover(2)))
    return {k: str(v) for k, v in paths.items()}


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip().startswith("{") else out)


def test_sp_eval_or2(capsys, artifacts):
    code, report = run_cli(capsys, "sp", "eval", artifacts["or2"], "11", "00")
    assert code == 0
    assert report["tool"] == "spanprog" and "version" in report
    rows = {r["x"]: r for r in report["result"]["per_input"]}
    assert rows["11"]["verdict"] == "accepted"
    assert rows["11"]["w_plus"] == pytest.approx(0.5)
    assert rows["00"]["verdict"] == "rejected"
    assert rows["00"]["w_minus"] == pytest.approx(2.0)


def test_sp_eval_with_table(capsys, artifacts):
    code, report = run_cli(capsys, "sp", "eval", artifacts["or2"],
                           "--table", artifacts["or2_table"])
    assert code == 0
    comp = report["result"]["complexity"]
    assert comp["approximates"]
    assert comp["W_minus"] == pytest.approx(2.0)


def test_sp_compile(capsys, artifacts):
    code, report = run_cli(capsys, "sp", "compile", artifacts["or2"],
                           artifacts["or2_table"])
    assert code == 0
    for row in report["result"]["per_input"]:
        assert row["output"] == row["expected"]


def test_sp_scale_emits_program(capsys, artifacts, tmp_path):
    out = tmp_path / "scaled.json"
    code, report = run_cli(capsys, "--out", str(out),
                           "sp", "scale", artifacts["or2"], "0.5")
    assert code == 0
    payload = json.loads(out.read_text())
    assert len(payload["columns"]) == 4


def test_alg_verify(capsys, artifacts):
    code, report = run_cli(capsys, "alg", "verify", artifacts["deutsch"],
                           artifacts["xor_table"])
    assert code == 0
    assert report["result"]["one_sided"]
    assert report["result"]["W_minus"] <= report["result"]["W_minus_cap"]


def test_mono_check_and_bounds(capsys, artifacts):
    code, report = run_cli(capsys, "mono", "check", artifacts["grover2"])
    assert code == 0 and report["result"]["monotone"]
    code, report = run_cli(capsys, "mono", "verify-bounds",
                           artifacts["grover2"], artifacts["or2_table"])
    assert code == 0
    assert report["result"]["one_sided"]


def test_lb_adeg_and_pattern(capsys, artifacts):
    code, report = run_cli(capsys, "lb", "adeg", artifacts["xor_table"],
                           "0.333333")
    assert code == 0 and report["result"]["approx_degree"] == 2
    code, report = run_cli(capsys, "lb", "pattern", artifacts["xor_table"],
                           "2")
    assert code == 0
    assert report["result"]["rank"] == report["result"]["sherstov_rank"]


def test_verify_list(capsys):
    code, report = run_cli(capsys, "verify", "all", "--list")
    assert code == 0
    assert len(report["result"]["criteria"]) == 12


def test_exit_code_io_error(capsys, tmp_path):
    code = cli.main(["sp", "eval", str(tmp_path / "missing.json")])
    assert code == 4
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["sp", "eval", str(bad)]) == 4


def test_exit_code_validation_error(capsys, artifacts):
    # table arity mismatch against a 2-bit program
    code = cli.main(["alg", "verify", artifacts["deutsch"],
                     artifacts["or2_table"]])
    assert code == 2


def test_exit_code_bound_violation(capsys, artifacts, tmp_path):
    # verify-bounds against the wrong truth table: bounded error fails
    wrong = tmp_path / "wrong_table.json"
    save_json(str(wrong), table_to_dict(
        {x: 1 - int(any(x)) for x in sc.all_inputs(2)}, 2))
    code = cli.main(["mono", "verify-bounds", artifacts["grover2"],
                     str(wrong)])
    assert code in (2, 3)
    capsys.readouterr()


def test_csv_format(capsys, artifacts):
    code = cli.main(["--format", "csv", "sp", "eval", artifacts["or2"],
                     "11"])
    out = capsys.readouterr().out
    assert code == 0
    header = out.splitlines()[0]
    assert "verdict" in header and "x" in header


def test_unknown_verb_rejected(artifacts):
    with pytest.raises(SystemExit):
        cli.main(["sp", "frobnicate", artifacts["or2"]])
