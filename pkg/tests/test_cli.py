import json

import pytest
from click.testing import CliRunner

from superquant.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def run(runner, *args):
    return runner.invoke(main, list(args), catch_exceptions=False)


def test_passing_suite_exits_zero(runner):
    res = run(runner, "verify", "clifford")
    assert res.exit_code == 0
    assert res.output.strip().endswith("checks passed")
    assert all(line.startswith("PASS") for line in res.output.splitlines()[:-1])


def test_failing_check_exits_one(runner):
    # n = 1 makes the Berezin check fail with its measured sign
    res = run(runner, "verify", "quantization")
    assert res.exit_code == 1
    assert "FAIL  quantization.berezin" in res.output


@pytest.mark.parametrize("args", [
    ["verify", "torus", "--grid", "7"],
    ["verify", "torus", "--m", "3"],
    ["verify", "torus", "--n", "-1"],
    ["verify", "torus", "--alpha", "-1"],
    ["verify", "torus", "--tol-trace", "0"],
    ["verify", "nosuchsuite"],
])
def test_bad_configuration_exits_two(runner, args):
    assert run(runner, *args).exit_code == 2


def test_tiny_grid_reports_truncation(runner):
    res = run(runner, "verify", "quantization", "--grid", "8", "--L", "2")
    assert res.exit_code == 1
    assert "truncation" in res.output


def test_config_file_and_flag_precedence(runner, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nn = 2\nalpha = 0.5\ntol-trace = 1e-5\n")
    out = tmp_path / "r.json"
    res = run(runner, "verify", "clifford", "--config", str(cfg), "--json", str(out))
    assert res.exit_code == 0
    conf = json.loads(out.read_text())["config"]
    assert conf["n"] == 2 and conf["alpha"] == [0.5, 0.0] and conf["tolerances"] == {"trace": 1e-5}
    res = run(runner, "verify", "clifford", "--config", str(cfg), "--n", "3", "--json", str(out))
    assert json.loads(out.read_text())["config"]["n"] == 3


@pytest.mark.parametrize("text", ["colour = red\n", "tol-nothing = 1\n", "n = two\n", "just words\n"])
def test_bad_config_file_exits_two(runner, tmp_path, text):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text)
    assert run(runner, "verify", "clifford", "--config", str(cfg)).exit_code == 2


def test_alpha_components(runner, tmp_path):
    out = tmp_path / "r.json"
    run(runner, "verify", "clifford", "--alpha-re", "0.6", "--alpha-im", "0.3", "--json", str(out))
    assert json.loads(out.read_text())["config"]["alpha"] == [0.6, 0.3]


def test_json_report_is_deterministic(runner, tmp_path):
    reports = []
    for k in range(2):
        out = tmp_path / f"r{k}.json"
        assert run(runner, "verify", "torus", "--json", str(out)).exit_code == 0
        data = json.loads(out.read_text())
        for c in data["checks"]:
            c.pop("runtime")
        data["config"].pop("json_path")
        reports.append(data)
    assert reports[0] == reports[1]
    assert reports[0]["status"] == "pass"
    rec = reports[0]["checks"][0]
    assert set(rec) == {"name", "anchor", "status", "measured", "expected", "tolerance", "diagnostic"}


def test_dump_tables_n0(runner):
    res = run(runner, "dump-tables", "--n", "0")
    data = json.loads(res.output)
    assert data["lambda"]["entries"] == [{"I": [], "J": [], "target": [], "re": "1", "im": "0"}]


def test_dump_tables_n1(runner):
    data = json.loads(run(runner, "dump-tables", "--n", "1").output)
    entries = {(tuple(e["I"]), tuple(e["J"])): (e["re"], e["im"]) for e in data["lambda"]["entries"]}
    assert len(entries) == 4
    assert entries[((1,), (1,))] == ("0", "1/4")
    assert data["canonical_basis"]["m"] == 2


def test_dump_tables_to_directory(runner, tmp_path):
    res = run(runner, "dump-tables", "--n", "3", "--out", str(tmp_path / "tables"))
    assert res.exit_code == 0 and res.output == ""
    files = sorted(p.name for p in (tmp_path / "tables").iterdir())
    assert files == ["canonical_basis_n3.json", "factor_set_star_n3.json", "lambda_n3.json", "sigma_clifford_n3.json"]
    cl = json.loads((tmp_path / "tables" / "sigma_clifford_n3.json").read_text())
    assert len(cl["entries"]) == 64


def test_dump_tables_is_deterministic(runner):
    first = run(runner, "dump-tables", "--n", "2", "--a0", "2", "--alpha", "1+1j").output
    assert first == run(runner, "dump-tables", "--n", "2", "--a0", "2", "--alpha", "1+1j").output
