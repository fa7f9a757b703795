import json

import pytest

from ekpolylog import cli


@pytest.fixture(autouse=True)
def cache_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.CACHE_ENV, str(tmp_path / "cache"))
    return tmp_path / "cache"


def run(capsys, *args):
    code = cli.main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_expand_connection_function(capsys):
    code, out, _ = run(capsys, "expand", "--curve", "gauss", "--what", "Ln", "--n", "2", "--format", "text")
    assert code == 0 and out.strip() == "L2 = -1/2*wp"


def test_expand_sigma_json(capsys):
    code, out, _ = run(capsys, "expand", "--what", "sigma", "--order", "9")
    report = json.loads(out)
    assert set(report) == {"command", "params", "results", "ledger", "version"}
    assert "5:-1/60" in report["results"][0]["series"]


def test_expand_xi_principal_row(capsys):
    code, out, _ = run(capsys, "expand", "--what", "xi", "--orders", "4,4")
    rows = json.loads(out)["results"]
    assert rows[0]["name"] == "w^-1" and rows[0]["series"].startswith("0:1 ;")


def test_output_is_deterministic(capsys):
    a = run(capsys, "eisenstein", "--a", "0", "--b", "4")[1]
    b = run(capsys, "eisenstein", "--a", "0", "--b", "4")[1]
    assert a == b


def test_eisenstein_value_00(capsys):
    code, out, _ = run(capsys, "eisenstein", "--a", "0", "--b", "0", "--z0", "lattice")
    r = json.loads(out)["results"][0]
    assert code == 0 and r["exact"]["value"] == "-1" and r["match"]


def test_eisenstein_numeric_only(capsys):
    code, out, _ = run(capsys, "eisenstein", "--a", "-1", "--b", "2", "--z0", "2tor:1", "--numeric-only")
    r = json.loads(out)["results"][0]
    assert code == 0 and "exact" not in r and r["numeric"]["provenance"].startswith("complex bound")


def test_padic_table_uses_cache(capsys, cache_dir):
    args = ("padic", "--p", "13", "--pi", "3+2i", "--z0", "2tor:1", "--table", "2", "--precision", "4")
    code, first, _ = run(capsys, *args)
    assert code == 0 and len(list(cache_dir.glob("*.json"))) == 1
    code, second, _ = run(capsys, *args)
    assert first == second


def test_padic_moment_verdict(capsys):
    code, out, _ = run(capsys, "padic", "--moment", "a=2,b=1", "--precision", "4", "--no-cache")
    r = json.loads(out)["results"][0]
    assert code == 0 and r["interpolation_match"] is True


def test_precision_shortfall_exit_code(capsys):
    code, _, err = run(capsys, "padic", "--table", "2", "--precision", "40", "--order", "30", "--no-cache")
    assert code == cli.EXIT_PRECISION and "precision exhausted" in err


@pytest.mark.parametrize("args", [
    ("expand", "--curve", "nope"),
    ("padic", "--moment", "a=1"),
    ("padic", "--p", "13"),
    ("eisenstein", "--z0", "point:2,2"),
    ("expand", "--what", "bogus"),
])
def test_configuration_errors(capsys, args):
    assert run(capsys, *args)[0] == cli.EXIT_CONFIG


def test_config_file_rejects_unknown_keys(capsys, tmp_path):
    f = tmp_path / "cfg.json"
    f.write_text(json.dumps({"bogus": 1}))
    assert run(capsys, "expand", "--config", str(f))[0] == cli.EXIT_CONFIG
    f.write_text(json.dumps({"what": "wp", "order": 8}))
    code, out, _ = run(capsys, "expand", "--config", str(f), "--order", "6")
    r = json.loads(out)
    assert code == 0 and r["params"]["what"] == "wp" and r["params"]["order"] == 6


def test_csv_output(capsys):
    code, out, _ = run(capsys, "expand", "--what", "torsion", "--n", "2", "--format", "csv")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0].startswith("annihilator") and len(lines) == 4


def test_verify_exact_suite(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "exact", "--format", "text")
    assert code == 0 and out.count("[PASS]") == 3


def test_cache_key_tracks_code_version(tmp_path):
    c = cli.Cache(str(tmp_path))
    k1 = c.key("m", "op", {"a": 1})
    c.version = "other"
    assert c.key("m", "op", {"a": 1}) != k1
