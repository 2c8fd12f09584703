import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from handbuilt import SAMPLES
from replsat.generate import random_formula
from replsat.model import is_hidden, parse_formula
from replsat.oracle import brute_force_sat
from replsat.solver import ModelError, SearchLimits, evaluate, extract_model, solve, verify_model


def load(name):
    return parse_formula((SAMPLES / name).read_text())


# ---------------------------------------------------------------- goldens


@pytest.mark.parametrize(
    "name, kind",
    [
        ("single_letter.str", "sat"),
        ("nested.str", "sat"),
        ("constant_pattern.str", "sat"),
        ("regex_pattern.str", "sat"),
        ("two_letters.str", "sat"),
        ("concat.str", "sat"),
        ("unsat.str", "unsat"),
        ("var_pattern.str", "unsupported"),
        ("length.str", "unsupported"),
        ("char.str", "unsupported"),
        ("indexof.str", "unsupported"),
    ],
)
def test_sample_verdicts(name, kind):
    f = load(name)
    v = solve(f)
    assert v.kind == kind
    if v.is_sat:
        assert verify_model(f, v.model)


def test_single_letter_golden_model():
    v = solve(load("single_letter.str"))
    assert (v.model["x"], v.model["y"], v.model["z"]) == ("11", "0101", "")


def test_constant_pattern_golden_subject():
    assert solve(load("constant_pattern.str")).model["y"] == "01010101"


def test_unsupported_reasons():
    assert "Post correspondence" in solve(load("var_pattern.str")).reason
    assert "Hilbert" in solve(load("length.str")).reason


def test_disjoint_memberships_are_unsat():
    f = parse_formula('alphabet "01"; assert x in /0*/; assert x in /11*/;')
    assert solve(f).kind == "unsat"


def test_formula_without_definitions():
    f = parse_formula('alphabet "01"; assert x in /1(0+1)*/;')
    v = solve(f)
    assert v.model == {"x": "1"}


def test_constant_subject():
    f = parse_formula('alphabet "01"; x := replaceall("0110", "1", z); assert x in /0000*/; assert z in /00*/;')
    v = solve(f)
    assert v.is_sat and v.model["z"] == "0"


# ---------------------------------------------------------------- model checking


def test_verify_model_names_the_failing_part():
    f = load("single_letter.str")
    model = dict(solve(f).model)
    model["x"] = "101100"
    check = verify_model(f, model)
    assert not check and "x" in check.message
    del model["x"]
    with pytest.raises(KeyError):
        verify_model(f, model)


def test_verify_model_reports_membership():
    f = parse_formula('alphabet "01"; assert x in /0*/;')
    check = verify_model(f, {"x": "1"})
    assert not check and "membership" in check.message


def test_extract_model_raises_on_empty_witness():
    from replsat.elimination import ConstraintEnv, Context, Problem, SuccinctConstraint
    from replsat.automata import compile_regex
    from replsat.regex import parse_regex

    f = parse_formula('alphabet "01"; assert x in /0/;')
    problem = Problem.from_formula(f)
    empty = compile_regex(parse_regex("{}"))
    env = ConstraintEnv({"x": (SuccinctConstraint.make(empty.graph, [(empty.initial, empty.finals)]),)}, ())
    with pytest.raises(ModelError):
        extract_model(env, f, problem, Context(problem.working))


def test_evaluate_defaults_missing_sources_to_empty():
    f = load("single_letter.str")
    assert evaluate(f, {"y": "0101"})["x"] == "11"


# ---------------------------------------------------------------- limits, determinism, parallel


def test_tiny_limits_give_resource_out():
    v = solve(load("nested.str"), SearchLimits(max_branches=1))
    assert v.kind == "resource-out" and "max-branches" in v.reason
    v = solve(load("constant_pattern.str"), SearchLimits(max_product_states=2))
    assert v.kind == "resource-out"


def test_invalid_limits():
    with pytest.raises(ValueError):
        SearchLimits(timeout_ms=0)


def test_repeat_runs_are_identical():
    f = load("nested.str")
    first = solve(f)
    for _ in range(3):
        again = solve(f)
        assert (again.kind, again.model, again.stats, again.trace) == (first.kind, first.model, first.stats, first.trace)


@pytest.mark.parametrize("name", ["nested.str", "two_letters.str", "unsat.str", "regex_pattern.str"])
def test_parallel_matches_sequential(name):
    f = load(name)
    seq, par = solve(f), solve(f, parallel=True)
    assert (seq.kind, seq.model) == (par.kind, par.model)


@pytest.mark.parametrize("name", ["nested.str", "two_letters.str", "unsat.str", "constant_pattern.str"])
def test_deferred_finals_agree(name):
    f = load(name)
    assert solve(f, SearchLimits(defer_finals=True)).kind == solve(f).kind


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**9))
def test_deferred_finals_agree_on_random_formulas(seed):
    f = random_formula(random.Random(seed), max_members=3)
    faithful, deferred = solve(f), solve(f, SearchLimits(defer_finals=True))
    assert faithful.kind == deferred.kind
    if deferred.is_sat:
        assert verify_model(f, deferred.model)


# ---------------------------------------------------------------- differential against the oracle


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9), st.sampled_from("lcre"))
def test_solver_agrees_with_oracle(seed, kind):
    f = random_formula(random.Random(seed), kinds=kind)
    v = solve(f, SearchLimits(timeout_ms=20_000))
    assert v.kind in ("sat", "unsat")
    oracle = brute_force_sat(f, 3)
    if oracle.is_sat:
        assert v.is_sat
    if v.is_sat:
        assert verify_model(f, v.model)


# ---------------------------------------------------------------- oracle


def test_oracle_examples():
    r = brute_force_sat(load("single_letter.str"), 4)
    assert r.is_sat and verify_model(load("single_letter.str"), r.model)
    assert not brute_force_sat(load("unsat.str"), 4).is_sat
    assert brute_force_sat(load("single_letter.str"), 0).kind == "no-witness"


def test_oracle_uses_length_lex_order():
    f = parse_formula('alphabet "10"; assert x in /(0+1)(0+1)/;')
    assert brute_force_sat(f, 2).model == {"x": "11"}


def test_oracle_rejects_bad_input():
    with pytest.raises(ValueError):
        brute_force_sat(load("single_letter.str"), -1)
    with pytest.raises(ValueError):
        brute_force_sat(load("var_pattern.str"), 2)


def test_oracle_handles_concat():
    r = brute_force_sat(load("concat.str"), 3)
    assert r.is_sat
    assert not any(is_hidden(v) for v in r.model if v in load("concat.str").sources)
