import pytest
from click.testing import CliRunner

from bccs.cli import main
from bccs.obstructions import validate_certificate

WORKED_P = "a.(a.0+a.a.0)+a.a.a.a.0"
WORKED_Q = "a.(a.0+a.a.a.0)+a.a.a.0"


@pytest.fixture
def run():
    runner = CliRunner()

    def go(*args):
        return runner.invoke(main, list(args), catch_exceptions=False)
    return go


def test_check_holds(run):
    r = run("check", "--rel", "if-pre", WORKED_P, WORKED_Q)
    assert r.exit_code == 0 and "holds" in r.output


def test_check_fails(run):
    assert run("check", "--rel", "wif-pre", "tau.0", "0").exit_code == 1


def test_check_open_prints_seed(run):
    r = run("check", "--rel", "t-pre", "--seed", "4", "a.x", "a.0")
    assert r.exit_code == 1 and "seed: 4" in r.output


def test_parse_error_exit_two(run):
    r = run("check", "a.(", "0")
    assert r.exit_code == 2


def test_bad_relation_exit_two(run):
    assert run("check", "--rel", "bisim", "0", "0").exit_code == 2


def test_fmt(run):
    r = run("fmt", "--canonical", "b.0 + a.0 + a.0")
    assert r.output.strip() == "a.0 + b.0"


def test_obs(run):
    assert run("obs", "traces", "a.b.0").output.split() == ["ε", "a", "ab"]


def test_oracle(run):
    r = run("oracle", "--rel", "if-pre", WORKED_P, WORKED_Q)
    assert r.exit_code == 0 and "oracle: holds" in r.output


def test_prove_if_and_replay(run, tmp_path):
    out = tmp_path / "d.txt"
    assert run("prove-if", WORKED_P, WORKED_Q, "--out", str(out)).exit_code == 0
    r = run("replay", str(out), "--axioms", "IF-gc")
    assert r.exit_code == 0


def test_prove_if_refused(run):
    assert run("prove-if", "a.(a.0+a.a.0)", "a.(a.0+a.a.a.0)").exit_code == 1


def test_prove_weak(run):
    r = run("prove-weak", "a.0", "tau.a.0")
    assert r.exit_code == 0 and "W1" in r.output
    assert run("prove-weak", "tau.a.0", "a.0").exit_code == 1


def test_transform(run):
    r = run("transform", "--axioms", "IF-gc", "--rel", "wif-pre")
    assert r.exit_code == 0 and "W1 : x <= tau.x" in r.output


def test_saturate(run):
    r = run("saturate", "a.0 + a.b.0", "--proof")
    assert r.exit_code == 0 and r.output.splitlines()[0] == "a.0 + a.b.0"


def test_family(run):
    r = run("family", "--family", "singleton", "--m", "2", "--alphabet", "a", "--sound")
    assert r.exit_code == 0 and "a.a.x <= a.a.x + x" in r.output
    assert run("family", "--family", "singleton", "--m", "2", "--alphabet", "a,b").exit_code == 2


def test_obstruct(run, tmp_path):
    out = tmp_path / "cert.txt"
    r = run("obstruct", "--axioms", "wif-gc", "--family", "wif-eq", "--m", "3",
            "--out", str(out))
    assert r.exit_code == 0
    text = out.read_text()
    assert "m: 3" in text and "verdict: non-derivable" in text
    assert validate_certificate(text)


def test_omega_check(run):
    r = run("omega-check", "--axioms", "IF-gc", "--goal", "a.(x+y) <= a.x + a.y",
            "--samples", "5")
    assert r.exit_code == 0
    r = run("omega-check", "--axioms", "A1-4", "--source", "IF-gc",
            "--goal", "a.(x+y) <= a.x + a.y", "--samples", "5")
    assert r.exit_code == 1 and "requirement 2" in r.output


def test_sweep(run, tmp_path):
    bad = tmp_path / "bad.ax"
    bad.write_text("mode preorder\nBAD : tau.x <= x\n")
    r = run("sweep", "--axioms", str(bad), "--rel", "wif-pre", "--count", "100",
            "--bound", "2", "--seed", "7")
    assert r.exit_code == 1 and "BAD: counterexample" in r.output
    r = run("sweep", "--axioms", "WIF-gc", "--rel", "wif-pre", "--count", "500",
            "--bound", "2", "--seed", "7")
    assert r.exit_code == 0 and "0 counterexample(s)" in r.output
    r = run("sweep", "--axioms", "A1-4", "--rel", "t-eq", "--count", "50")
    assert r.exit_code == 0


def test_sweep_file_error_has_line(run, tmp_path):
    f = tmp_path / "broken.ax"
    f.write_text("mode preorder\n# ok\nX : a.x\n")
    r = run("sweep", "--axioms", str(f), "--rel", "wif-pre")
    assert r.exit_code == 2 and "line 3" in r.output


def test_replay_laws(run):
    r = run("replay-laws")
    assert r.exit_code == 0
    assert r.output.count(": ok (") == 14
