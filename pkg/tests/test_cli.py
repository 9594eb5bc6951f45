import csv
import io
import json
import math

import jsonschema
import pytest

from mcsecrecy.ciphermodel import load
from mcsecrecy.cli import EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE, run
from mcsecrecy.schemas import SCHEMAS


def invoke(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def invoke_json(*argv):
    code, text, err = invoke(*argv, "--json")
    doc = json.loads(text)
    jsonschema.validate(doc, SCHEMAS[argv[0]])
    return code, doc


class TestAnalyze:
    def test_c2_text(self):
        code, text, _ = invoke("analyze", "--ref", "c2")
        assert code == EXIT_OK
        fields = dict(line.split(None, 1) for line in text.strip().splitlines())
        assert fields["rho_m"].strip() == "0.7071067812"
        assert fields["mi_bits"].strip() == "1"

    def test_c2_json(self):
        code, doc = invoke_json("analyze", "--ref", "c2")
        assert code == EXIT_OK
        assert doc["report"]["rho_m"] == pytest.approx(math.sqrt(0.5))

    def test_stream_file_reports_walsh(self, tmp_path):
        path = tmp_path / "s.json"
        assert invoke("construct", "stream", "--n", "5", "--s", "3", "--out", str(path))[0] == EXIT_OK
        code, doc = invoke_json("analyze", "--cipher", str(path))
        assert doc["checks"]["walsh_rho"] == pytest.approx(doc["report"]["rho_m"], abs=1e-9)

    def test_with_pmf(self, tmp_path):
        pmf = tmp_path / "p.txt"
        pmf.write_text("0.4\n0.3\n0.2\n0.1\n")
        code, doc = invoke_json("analyze", "--ref", "c2", "--pmf", str(pmf))
        assert code == EXIT_OK

    def test_missing_cipher(self):
        code, _, err = invoke("analyze")
        assert code == EXIT_USAGE
        assert "usage:" in err

    def test_unknown_ref(self):
        code, _, err = invoke("analyze", "--ref", "des")
        assert code == EXIT_USAGE
        assert "unknown reference cipher" in err

    def test_malformed_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{")
        assert invoke("analyze", "--cipher", str(path))[0] == EXIT_USAGE

    def test_collision_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"format_version": 1, "label": "x", "n_messages": 2, "n_keys": 1,
                                    "n_ciphertexts": 2, "table": [[1, 1]]}))
        code, _, err = invoke("analyze", "--cipher", str(path))
        assert code == EXIT_USAGE and "key 0" in err


class TestConstruct:
    @pytest.mark.parametrize("argv", [
        ("stream", "--n", "4", "--s", "2"),
        ("stream", "--n", "2", "--streams", "0,3"),
        ("expander", "--n", "3", "--d", "2"),
        ("ref", "--ref", "counterexample(3)"),
        ("random", "--messages", "5", "--keys", "3", "--ciphertexts", "6"),
    ])
    def test_kinds(self, tmp_path, argv):
        path = tmp_path / "c.json"
        code, doc = invoke_json("construct", *argv, "--out", str(path))
        assert code == EXIT_OK
        assert load(path).n_messages == doc["cipher"]["n_messages"]

    def test_stdout_is_cipher_file(self):
        code, text, _ = invoke("construct", "ref", "--ref", "c2")
        assert code == EXIT_OK
        assert json.loads(text)["table"] == [[0, 1, 2, 3], [1, 2, 3, 0]]

    def test_seeded(self):
        a = invoke("construct", "stream", "--n", "6", "--s", "3", "--seed", "5")[1]
        b = invoke("construct", "stream", "--n", "6", "--s", "3", "--seed", "5")[1]
        c = invoke("construct", "stream", "--n", "6", "--s", "3", "--seed", "6")[1]
        assert a == b != c

    def test_missing_args(self):
        assert invoke("construct", "expander", "--n", "3")[0] == EXIT_USAGE
        assert invoke("construct", "stream", "--n", "2", "--streams", "0,1,2")[0] == EXIT_USAGE

    def test_bad_kind(self):
        assert invoke("construct", "lattice")[0] == EXIT_USAGE


class TestCascade:
    def test_c2_c2(self):
        code, doc = invoke_json("cascade", "c2", "c2")
        assert code == EXIT_OK
        assert doc["rho_m"] <= 0.5 + 1e-9 and doc["submultiplicative"]

    def test_files(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        invoke("construct", "random", "--messages", "4", "--keys", "2", "--out", str(a))
        invoke("construct", "ref", "--ref", "otp(2)", "--out", str(b))
        code, doc = invoke_json("cascade", str(a), str(b), "--out", str(tmp_path / "ab.json"))
        assert code == EXIT_OK
        assert doc["rho_m"] == pytest.approx(0, abs=1e-9)
        assert load(tmp_path / "ab.json").n_keys == 8

    def test_mismatch(self):
        assert invoke("cascade", "c2", "otp(3)")[0] == EXIT_USAGE

    def test_single(self):
        assert invoke("cascade", "c2")[0] == EXIT_USAGE


class TestAdvantage:
    def test_c2_one_bit(self):
        code, doc = invoke_json("advantage", "--ref", "c2", "--one-bit", "--check-bounds")
        assert code == EXIT_OK
        assert doc["result"]["best_guess_probability"] == pytest.approx(0.75)
        assert all(c["passed"] for c in doc["checks"])

    def test_general_with_checks(self, tmp_path):
        pmf = tmp_path / "p.txt"
        pmf.write_text("0.4\n0.3\n0.2\n0.1\n")
        code, doc = invoke_json("advantage", "--ref", "c1", "--pmf", str(pmf), "--check-bounds")
        assert code == EXIT_OK
        assert {c["name"] for c in doc["checks"]} == {"renyi_advantage[general]", "entropic_security"}

    def test_side_info(self, tmp_path):
        h = tmp_path / "h.txt"
        h.write_text("0 a\n1 b\n2 a\n3 b\n")
        code, doc = invoke_json("advantage", "--ref", "c2", "--side-info", str(h), "--check-bounds")
        assert code == EXIT_OK
        assert doc["side_info"]["details"]["tau_bits"] == pytest.approx(1.0)
        code, text, _ = invoke("advantage", "--ref", "c2", "--side-info", str(h))
        assert "tau_bits" in text

    def test_too_large(self):
        code, _, err = invoke("advantage", "--ref", "otp(4)")
        assert code == EXIT_USAGE and "limited" in err


class TestBounds:
    def test_headline_text(self):
        code, text, _ = invoke("bounds", "--n", "8e9", "--s", "512", "--leaked", "100")
        assert code == EXIT_OK
        assert "1.544884796e-72" in text
        assert "1.739385648e-57" in text

    def test_headline_json(self):
        code, doc = invoke_json("bounds", "--n", "8e9", "--s", "512", "--leaked", "100")
        results = {r["name"]: r for r in doc["results"]}
        assert results["advantage_bound_leaked"]["value_decimal"].startswith("1.739")

    def test_rho_power_syntax(self):
        code, doc = invoke_json("bounds", "--n", "1e4", "--rho", "2^-10", "--alpha", "16")
        results = {r["name"]: r for r in doc["results"]}
        assert results["expander_key_for_rho"]["value_log2"] == pytest.approx(22)
        assert "existence" in results["rand_achieve_key"]["note"]

    def test_curves_csv(self, tmp_path):
        path = tmp_path / "curves.csv"
        assert invoke("bounds", "--fig2", "--n", "1e4", "--out", str(path))[0] == EXIT_OK
        rows = list(csv.DictReader(path.open()))
        assert len(rows) == 81
        at = next(r for r in rows if float(r["rho_log2"]) == -10)
        assert float(at["stream_bits"]) == pytest.approx(35.2877, abs=1e-3)

    def test_curves_json(self):
        code, doc = invoke_json("bounds", "--fig2", "--grid=-4:0:5")
        assert len(doc["curves"]["rows"]) == 5

    def test_criterion(self):
        code, doc = invoke_json("bounds", "--n", "100", "--criterion", "leakage", "--leakage-rate", "0.5")
        assert doc["results"][-1]["value_log2"] == -25

    @pytest.mark.parametrize("argv", [
        ("bounds",),
        ("bounds", "--n", "10"),
        ("bounds", "--n", "10", "--rho", "two"),
        ("bounds", "--n", "10", "--rho", "2"),
        ("bounds", "--n", "10", "--bogus", "1"),
    ])
    def test_usage_errors(self, argv):
        assert invoke(*argv)[0] == EXIT_USAGE


class TestMonteCarlo:
    def test_small(self, tmp_path):
        path = tmp_path / "mc.csv"
        code, doc = invoke_json("montecarlo", "--n", "8", "--rho", "0.5", "--trials", "20",
                                "--seed", "3", "--out", str(path))
        assert code == EXIT_OK and doc["trials"] == 20
        rows = list(csv.DictReader(path.open()))
        assert len(rows) == 20 and set(rows[0]) == {"seed", "n", "s", "rho", "pass"}

    def test_zero_trials(self):
        code, doc = invoke_json("montecarlo", "--n", "8", "--rho", "0.5", "--trials", "0")
        assert code == EXIT_OK and doc["passes"] == 0 and doc["pass_fraction"] is None

    def test_otp_sized(self):
        code, doc = invoke_json("montecarlo", "--n", "6", "--s", "6", "--rho", "0.9", "--trials", "20")
        assert doc["pass_fraction"] >= 0.9

    def test_too_large(self):
        assert invoke("montecarlo", "--n", "40", "--s", "1", "--rho", "0.5", "--trials", "1")[0] == EXIT_USAGE


class TestVerify:
    def test_small(self):
        code, text, _ = invoke("verify", "--battery", "small")
        assert code == EXIT_OK
        assert "10/10 checks passed" in text

    def test_json(self):
        code, doc = invoke_json("verify")
        assert code == EXIT_OK and doc["passed"] and len(doc["checks"]) == 10

    def test_failure_exit_code(self, monkeypatch):
        import mcsecrecy.cli as cli
        from mcsecrecy.verification import CheckOutcome

        monkeypatch.setattr(cli, "run_battery", lambda kind, seed: [CheckOutcome("x", False, "broken")])
        assert invoke("verify")[0] == EXIT_CHECK_FAILED


@pytest.mark.parametrize("argv", [
    ("analyze", "--ref", "counterexample(3)"),
    ("construct", "expander", "--n", "4", "--d", "3", "--seed", "9"),
    ("advantage", "--ref", "c1", "--check-bounds"),
    ("bounds", "--n", "16", "--rho", "0.5", "--epsilon", "0.1", "--s", "9"),
    ("montecarlo", "--n", "8", "--rho", "0.5", "--trials", "10", "--seed", "1"),
    ("verify",),
])
@pytest.mark.parametrize("as_json", [False, True])
def test_deterministic(argv, as_json):
    extra = ("--json",) if as_json else ()
    first = invoke(*argv, *extra)
    second = invoke(*argv, *extra)
    assert first == second
    assert first[0] == EXIT_OK


def test_no_subcommand():
    assert invoke()[0] == EXIT_USAGE


def test_entry_point_help(capsys):
    assert run(["--help"]) == EXIT_OK
    assert "analyze" in capsys.readouterr().out
