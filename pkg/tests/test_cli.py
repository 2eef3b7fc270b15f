import json

import pytest

from chainforge.cli import run


@pytest.fixture
def spec(tmp_path):
    def write(data, name="spec.json"):
        p = tmp_path / name
        p.write_text(data if isinstance(data, str) else json.dumps(data))
        return str(p)
    return write


def go(tmp_path, *argv):
    out = tmp_path / "report.json"
    code = run(["--out", str(out), *argv])
    report = json.loads(out.read_text()) if out.exists() else None
    return code, report


def test_example_ex2_1(tmp_path, capsys):
    code, rep = go(tmp_path, "example", "ex2.1", "--horizon", "6")
    assert code == 0 and rep["ok"]
    body = rep["result"]["report"]
    assert [s["prime"] for s in body["stages"]] == ["prime"] * 6
    assert body["limits"][0]["semiprime"] == "not_semiprime"
    assert body["index_lower_bound"] == 1
    assert rep["schema_version"] == 1
    assert "ok" in capsys.readouterr().out


def test_example_ex6_3(tmp_path):
    code, rep = go(tmp_path, "example", "ex6.3", "--n", "3")
    assert code == 0
    assert rep["result"]["rn_report"]["index"] == 2 and rep["result"]["rn_report"]["bound_holds"]


@pytest.mark.parametrize("name", ["ex2.2", "ex2.4", "ex4.5", "exKL"])
def test_other_examples_pass(tmp_path, name):
    code, rep = go(tmp_path, "example", name)
    assert code == 0 and rep["ok"]


def test_example_ex3_4_short(tmp_path):
    code, rep = go(tmp_path, "example", "ex3.4", "--horizon", "3")
    assert code == 0


def test_ideal_check_expectation_mismatch(tmp_path, spec):
    path = spec({"alphabet": "xy", "generators": ["xx", "xyx"], "expect": "not_prime"})
    code, rep = go(tmp_path, "ideal", "check", path, "--prime")
    assert code == 1 and not rep["ok"]
    assert rep["result"]["prime"]["status"] == "prime"


def test_ideal_check_match_and_closure(tmp_path, spec):
    path = spec({"alphabet": "xy", "generators": ["x"], "expect": {"prime": "prime", "semiprime": "semiprime"}})
    code, rep = go(tmp_path, "ideal", "check", path)
    assert code == 0 and len(rep["expectations"]) == 2
    path = spec({"alphabet": "xy", "generators": ["x", "yyy"]}, "c.json")
    code, rep = go(tmp_path, "ideal", "check", path, "--closure")
    assert code == 0 and rep["result"]["closure"]["equals_input"] is False
    assert rep["result"]["closure"]["automaton"].startswith("start:")


def test_chain_report(tmp_path, spec):
    path = spec({"builtin": "ex2_1", "params": {"horizon": 6}, "expect": {"index_lower_bound": 1}})
    code, rep = go(tmp_path, "chain", "report", path)
    assert code == 0 and rep["result"]["almost_prime"][0]["almost_prime"]
    path = spec({"explicit": [{"alphabet": "xy", "generators": ["xx"]}, {"alphabet": "xy", "generators": ["xx"]}]},
                "bad.json")
    code, rep = go(tmp_path, "chain", "report", path)
    assert code == 1 and rep["result"]["validation"]["failure"]["check"] == "a"


def test_grid_check(tmp_path, spec):
    l1 = [{"family": 1, "index": 1}]
    l1m = [{"monomial": l1, "families": [1]}]
    path = spec({"grid": [[l1, l1m], [l1m, l1]], "expect": {"semiprime": False}})
    code, rep = go(tmp_path, "grid", "check", path, "--oracle-degree", "2")
    assert code == 0
    assert rep["result"]["condition_star"]["counterexample"] == {"position": [1, 2], "monomial": "l1_1"}


def test_freeproduct_commands(tmp_path):
    code, rep = go(tmp_path, "freeproduct", "witness", "--v", "1", "--v", "y", "--m", "2")
    assert code == 0 and rep["result"]["verified"]
    code, rep = go(tmp_path, "freeproduct", "probe", "--f", "x*(1/y^2)*x", "--f2", "x*(1/y^2)*x", "--m", "1")
    assert code == 0 and rep["result"]["certificate"]["verified"]
    code, rep = go(tmp_path, "freeproduct", "union", "--max-m", "3", "--samples", "3")
    assert code == 0
    code, _ = go(tmp_path, "freeproduct", "probe", "--f", "x*(1/y)*x", "--f2", "x*(1/y^2)*x", "--m", "1")
    assert code == 2


def test_oracle_compare(tmp_path, spec):
    path = spec({"alphabet": "xy", "generators": ["xx", "xyx"]})
    code, rep = go(tmp_path, "oracle", "compare", path, "--max-u", "3", "--max-w", "4")
    assert code == 0 and rep["result"]["prime"]["agrees"]


@pytest.mark.parametrize("argv", [
    ["example", "ex2.1", "--horizon", "13"],
    ["example", "ex6.3", "--n", "9"],
    ["example", "nope"],
    ["ideal", "check", "/nonexistent.json"],
])
def test_usage_errors(tmp_path, argv, capsys):
    code, _ = go(tmp_path, *argv)
    assert code == 2


def test_malformed_spec_diagnostics(tmp_path, spec, capsys):
    path = spec('{"alphabet": "xy",\n  "generators": [}')
    code, _ = go(tmp_path, "ideal", "check", path)
    assert code == 2
    assert "line 2" in capsys.readouterr().err
    path = spec({"alphabet": "xy"}, "nogens.json")
    code, _ = go(tmp_path, "ideal", "check", path)
    assert code == 2
    assert "generators" in capsys.readouterr().err


def test_invalid_seed(tmp_path, monkeypatch):
    monkeypatch.setenv("CHAINFORGE_SEED", "abc")
    code, _ = go(tmp_path, "example", "ex2.1", "--horizon", "2")
    assert code == 2


def test_timings_only_on_request(tmp_path):
    _, rep = go(tmp_path, "example", "ex4.5")
    assert "timings" not in rep
    _, rep = go(tmp_path, "--timings", "example", "ex4.5")
    assert "timings" in rep
