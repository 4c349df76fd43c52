"""Operator grammar, problem files, subcommands, exit codes, JSON schema."""
import json
import os
import subprocess
import sys

import pytest

from holozeta import QQ, TermOrder, WeylOperator, d_n, d_n_s
from holozeta.cli import InputError, ProblemFile, parse_operator, run

W = WeylOperator
ROOT = os.path.join(os.path.dirname(__file__), "..")
PROBLEMS = os.path.join(ROOT, "problems")


def prob(name):
    return os.path.join(PROBLEMS, name)


# ---------------------------------------------------------------------------
# operator grammar
# ---------------------------------------------------------------------------

def test_parse_ex3_generator():
    sig = d_n(("x",))
    x, dx = W.gen(sig, "x"), W.gen(sig, "dx")
    assert parse_operator("x^2*dx + x^2 - 1", sig) == x * x * dx + x * x - 1


def test_parse_normal_orders():
    sig = d_n(("x",))
    x, dx = W.gen(sig, "x"), W.gen(sig, "dx")
    assert parse_operator("dx*x", sig) == x * dx + 1


def test_parse_rationals_and_parens():
    sig = d_n_s(("x",))
    x, s = W.gen(sig, "x"), W.gen(sig, "s")
    assert parse_operator("3/4*(x + s)^2 - 1/2", sig) == \
        (x + s) * (x + s) * QQ(3, 4) - QQ(1, 2)


def test_parse_errors_carry_position():
    sig = d_n(("x",))
    with pytest.raises(InputError):
        parse_operator("3*x^-1", sig)          # negative exponent
    with pytest.raises(InputError):
        parse_operator("2x", sig)              # juxtaposition
    with pytest.raises(InputError):
        parse_operator("x + q", sig)           # unknown variable
    with pytest.raises(InputError):
        parse_operator("1/0", sig)             # malformed rational
    err = None
    try:
        parse_operator("x + ?", sig)
    except InputError as exc:
        err = exc
    assert err is not None and "line" in str(err)


def test_print_parse_round_trip_random():
    import random
    rng = random.Random(77)
    sig = d_n_s(("x", "y"))
    order = TermOrder.grevlex(sig)
    for _ in range(40):
        op = W.zero(sig)
        for _ in range(rng.randint(1, 4)):
            mono = [0] * sig.nslots
            for _ in range(rng.randint(0, 3)):
                mono[rng.randrange(sig.nslots)] += 1
            c = QQ(rng.randint(-5, 5), rng.randint(1, 4))
            if c:
                op = op + W(sig, {tuple(mono): c})
        assert parse_operator(op.to_str(order), sig) == op


# ---------------------------------------------------------------------------
# problem files and commands (in process via run())
# ---------------------------------------------------------------------------

def test_problem_file_load():
    pf = ProblemFile.load(prob("cusp.prob"))
    assert pf.vars == ("x", "y")
    assert pf.lambda0 == QQ(-5, 6) and pf.k == -1
    assert pf.assume_saturated
    inst = pf.instance()
    assert inst.f.total_degree() == 3


def test_problem_file_requires_saturation(tmp_path):
    p = tmp_path / "bad.prob"
    p.write_text("vars: x\nf: x\nannihilator: dx\n")
    pf = ProblemFile.load(str(p))
    with pytest.raises(InputError):
        pf.instance()


def test_problem_file_unknown_key(tmp_path):
    p = tmp_path / "bad.prob"
    p.write_text("vars: x\nf: x\nannihilator: dx\nwhatever: 1\n")
    with pytest.raises(InputError):
        ProblemFile.load(str(p))


def test_run_bfun_cusp(capsys):
    rc = run(["bfun", prob("cusp.prob")])
    out = capsys.readouterr().out
    assert rc == 0
    assert "(s+1)(6s+5)(6s+7)" in out


def test_run_laurent_cusp_flags(capsys):
    rc = run(["laurent", prob("cusp.prob"), "--lambda0=-5/6", "--k=-1"])
    out = capsys.readouterr().out
    assert rc == 0
    lines = [l.strip() for l in out.splitlines()]
    assert "x" in lines and "y" in lines


def test_run_zeta_diff_gamma(capsys):
    rc = run(["zeta-diff", prob("gamma.prob")])
    out = capsys.readouterr().out
    assert rc == 0
    assert "E - (s+1)" in out


def test_run_json_validates_against_schema(capsys):
    rc = run(["zeta-diff", prob("gamma.prob"), "--json"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    schema = json.load(open(os.path.join(ROOT, "docs", "result.schema.json")))
    _validate(doc, schema)
    assert doc["difference_operators"] == ["E - (s+1)"]
    assert "timing" not in doc            # deterministic by default


def test_run_json_deterministic(capsys):
    rc = run(["bfun", prob("cusp.prob"), "--json"])
    out1 = capsys.readouterr().out
    rc2 = run(["bfun", prob("cusp.prob"), "--json"])
    out2 = capsys.readouterr().out
    assert rc == rc2 == 0 and out1 == out2


def test_run_verify_gamma(capsys):
    rc = run(["verify", prob("gamma.prob"), "--box", "50", "--tol", "1e-6"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "annihilator_sound: True" in out
    assert "functional_equation_holds: True" in out
    assert "numeric_residual_ok: True" in out


def test_run_input_error_exit_3(tmp_path, capsys):
    p = tmp_path / "broken.prob"
    p.write_text("vars: x\nf: 3*x^-1\nannihilator: dx\nassume_saturated: true\n")
    rc = run(["bfun", str(p)])
    capsys.readouterr()
    assert rc == 3
    rc = run(["bfun", str(tmp_path / "missing.prob")])
    capsys.readouterr()
    assert rc == 3


def test_run_timeout_exit_2(capsys):
    rc = run(["zeta-diff", prob("ex4.prob"), "--timeout", "2"])
    capsys.readouterr()
    assert rc == 2


def test_console_entry_point_version():
    env = dict(os.environ)
    env["PYTHONPATH"] = os.path.join(ROOT, "src") + os.pathsep + env.get("PYTHONPATH", "")
    out = subprocess.run([sys.executable, "-m", "holozeta.cli", "--version"],
                         capture_output=True, text=True, env=env)
    assert out.returncode == 0
    assert "holozeta 0.1.0" in out.stdout


# ---------------------------------------------------------------------------
# minimal JSON-schema validator covering the subset the schema uses
# ---------------------------------------------------------------------------

def _validate(doc, schema, path="$"):
    typ = schema.get("type")
    if typ == "object":
        assert isinstance(doc, dict), path
        for req in schema.get("required", ()):
            assert req in doc, f"{path}.{req} missing"
        props = schema.get("properties", {})
        extra = schema.get("additionalProperties", True)
        for key, val in doc.items():
            if key in props:
                _validate(val, props[key], f"{path}.{key}")
            elif isinstance(extra, dict):
                _validate(val, extra, f"{path}.{key}")
            else:
                assert extra, f"{path}.{key} unexpected"
    elif typ == "array":
        assert isinstance(doc, list), path
        for i, item in enumerate(doc):
            _validate(item, schema.get("items", {}), f"{path}[{i}]")
    elif typ == "string":
        assert isinstance(doc, str), path
        if "enum" in schema:
            assert doc in schema["enum"], path
    elif typ == "integer":
        assert isinstance(doc, int) and not isinstance(doc, bool), path
    elif typ == "number":
        assert isinstance(doc, (int, float)) and not isinstance(doc, bool), path
    elif typ == "boolean":
        assert isinstance(doc, bool), path


def test_emitted_generators_round_trip(capsys):
    # ResultDocument invariant: parsing an emitted generator string
    # reproduces the identical operator (and re-prints identically)
    rc = run(["ann-fs", prob("cusp.prob"), "--json"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    sig = d_n_s(("x", "y"))
    order = TermOrder.grevlex(sig)
    for text in doc["generators"]:
        op = parse_operator(text, sig)
        assert op.to_str(order) == text


def test_ann_fs_runs_without_saturation_assertion(tmp_path, capsys):
    p = tmp_path / "unsat.prob"
    p.write_text("vars: x\nf: x\nannihilator: dx\n")
    rc = run(["ann-fs", str(p)])
    out = capsys.readouterr().out
    assert rc == 0
    assert "f-saturation" in out
    # but b-function computation refuses
    rc = run(["bfun", str(p)])
    capsys.readouterr()
    assert rc == 3
