import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from handbuilt import ALTERNATING_01, BLOCKS_0101, CONTAINS_DOUBLE, ZEROS_THEN_ONES, replay_nested_trace
from replsat.automata import Nfa, compile_regex, product, words_up_to
from replsat.elimination import (
    ConstraintEnv,
    Context,
    GuessTrace,
    PatternSpec,
    Problem,
    Step,
    SuccinctConstraint,
    build_B_const,
    build_B_epsilon,
    build_B_regex,
    build_B_single,
    candidate_guesses,
    eliminate_vertex,
    final_choices,
    initial_env,
)
from replsat.generate import random_regex
from replsat.model import parse_formula
from replsat.regex import parse_regex
from replsat.semantics import replace_all

WORDS = list(words_up_to("01", 7))
T_GRAPH = CONTAINS_DOUBLE.graph
TZ = frozenset({(0, 0), (1, 2)})


def accepts(rw, pair, word):
    start, ends = rw.lift(pair)
    return Nfa(rw.graph, start, ends).accepts(word)


def relation(graph, word):
    """All (q, r) with a ``word``-labelled path q -> r."""
    out = set()
    for q in range(graph.n):
        cur = frozenset([q])
        for a in word:
            cur = graph.step(cur, a)
        out |= {(q, r) for r in cur}
    return frozenset(out)


# ---------------------------------------------------------------- single letter


def test_single_letter_worked_example():
    rw = build_B_single(T_GRAPH, "0", TZ)
    b = Nfa(rw.graph, 0, frozenset([2]))
    assert b.accepts("0101")
    assert product(ALTERNATING_01, b).accepts("0101")
    assert replace_all("0101", "0", "10") == "101101"
    assert CONTAINS_DOUBLE.accepts("101101")


def test_single_letter_empty_guess_drops_edges():
    rw = build_B_single(T_GRAPH, "0", frozenset())
    assert not any(a == "0" for _, a, _ in rw.graph.transitions)
    assert {t for t in rw.graph.transitions} == {t for t in T_GRAPH.transitions if t[1] == "1"}


def test_single_letter_identity_guess_keeps_graph():
    zero_edges = frozenset((q, r) for q, a, r in T_GRAPH.transitions if a == "0")
    rw = build_B_single(T_GRAPH, "0", zero_edges)
    assert rw.graph.transitions == T_GRAPH.transitions


# ---------------------------------------------------------------- constants and regexes


def test_const_worked_example():
    rw = build_B_const(T_GRAPH, "010", TZ, "01")
    assert accepts(rw, (0, frozenset([2])), "01010101")
    assert replace_all("01010101", "010", "10") == "101101"


def test_regex_worked_example():
    rw = build_B_regex(T_GRAPH, parse_regex("0*01(1*+0*)"), TZ, "01")
    assert accepts(rw, (0, frozenset([2])), "010101")
    assert replace_all("010101", parse_regex("0*01(1*+0*)"), "10") == "10110"


@pytest.mark.parametrize("pattern", ["010", "00", "0*1", "0*01(1*+0*)"])
def test_empty_guess_forbids_matches(pattern):
    pat = pattern if pattern.isdigit() else parse_regex(pattern)
    build = build_B_const if isinstance(pat, str) else build_B_regex
    rw = build(T_GRAPH, pat, frozenset(), "01")
    pair = (0, frozenset([2]))
    for w in WORDS:
        no_match = replace_all(w, pat, "#") == w
        assert accepts(rw, pair, w) == (no_match and CONTAINS_DOUBLE.accepts(w))


def test_epsilon_worked_example():
    # v a1 v a2 v: with v = "1" the word "00" becomes "10101"
    tz = relation(T_GRAPH, "1")
    rw = build_B_epsilon(T_GRAPH, tz)
    for w in WORDS:
        assert accepts(rw, (0, frozenset([2])), w) == CONTAINS_DOUBLE.accepts(replace_all(w, "", "1"))


# ---------------------------------------------------------------- exactness of every rewrite


SPECS = [
    PatternSpec("letter", "0"),
    PatternSpec("letter", "1"),
    PatternSpec("const", "01"),
    PatternSpec("const", "110"),
    PatternSpec("epsilon"),
    PatternSpec("regex", regex=parse_regex("0*1")),
    PatternSpec("regex", regex=parse_regex("(01)*0")),
    PatternSpec("nullable", regex=parse_regex("0*")),
    PatternSpec("nullable", regex=parse_regex("(10)*")),
]


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 10**9), st.sampled_from(SPECS), st.text(alphabet="01", max_size=2))
def test_rewrite_with_exact_guess_is_exact(seed, spec, z):
    """With tz equal to z's full relation, the rewrite accepts y iff replaceall(y) is accepted."""
    rng = random.Random(seed)
    t = compile_regex(random_regex(rng, "01", rng.randint(1, 6)))
    c = SuccinctConstraint.make(t.graph, [(t.initial, t.finals)])
    rw = Context(("0", "1")).rewrite(c, spec, relation(t.graph, z))
    (pair,) = c.pairs
    pattern = spec.as_regex()
    for y in WORDS[:127]:
        assert accepts(rw, pair, y) == t.accepts(replace_all(y, pattern, z)), (y, z, str(spec))


# ---------------------------------------------------------------- eliminate_vertex


def test_replay_of_nested_trace():
    env1, env2, words = replay_nested_trace()
    assert [c.pairs for c in env1.of("z")] == [((0, frozenset([0])),), ((0, frozenset([0])), (1, frozenset([2])))]
    assert len(env1.of("y")) == 2
    assert "x" not in [s.var for s in env1.remaining]
    assert env2.remaining == ()
    assert len(env2.of("y'")) == 3
    assert len(env2.of("z'")) == 3
    assert words == {"y'": "11", "z'": "01", "z": "10"}


def test_eliminate_vertex_without_constraints_just_removes():
    step = Step("x", "y", PatternSpec("letter", "0"), "z")
    env = ConstraintEnv({"y": ()}, (step,))
    out = eliminate_vertex(env, "x", [], Context(("0", "1")))
    assert out.remaining == () and out.of("y") == () and out.of("z") == ()


def test_eliminate_vertex_rejects_bad_calls():
    steps = (
        Step("y", "w", PatternSpec("letter", "1"), "v"),
        Step("x", "y", PatternSpec("letter", "0"), "z"),
    )
    c = SuccinctConstraint.make(ALTERNATING_01.graph, [(0, [0])])
    env = ConstraintEnv({"x": (c,), "y": (c,)}, steps)
    ctx = Context(("0", "1"))
    with pytest.raises(ValueError):
        eliminate_vertex(env, "y", [frozenset()], ctx)  # still used by x
    with pytest.raises(ValueError):
        eliminate_vertex(env, "x", [], ctx)  # wrong number of guesses
    with pytest.raises(ValueError):
        eliminate_vertex(env, "w", [], ctx)  # not defined


def test_same_subject_and_replacement_share_constraints():
    step = Step("x", "y", PatternSpec("letter", "0"), "y")
    c = SuccinctConstraint.make(CONTAINS_DOUBLE.graph, [(0, [2])])
    out = eliminate_vertex(ConstraintEnv({"x": (c,)}, (step,)), "x", [TZ], Context(("0", "1")))
    assert len(out.of("y")) == 2


# ---------------------------------------------------------------- guesses, finals, traces


NESTED = """
alphabet "01";
y := replaceall(y', "1", z');
x := replaceall(y, "0", z);
assert x in /(0+1)*(00+11)(0+1)*/;
assert y in /(01)*/;
assert z in /(10)*/;
"""


def test_final_choices_and_initial_env():
    problem = Problem.from_formula(parse_formula(NESTED))
    choices = final_choices(problem)
    assert choices == sorted(choices)
    assert len(choices) == 1 or all(len(c) == 3 for c in choices)
    env = initial_env(problem, choices[0])
    assert set(env.constraints) == {"x", "y", "z"}
    assert env.next_vertex().var == "x"


def test_candidate_guesses_are_sorted_and_nonempty():
    problem = Problem.from_formula(parse_formula(NESTED))
    ctx = Context(problem.working)
    env = initial_env(problem, [None] * len(problem.memberships))
    cands = candidate_guesses(env, env.next_vertex(), problem, ctx)
    assert cands
    keys = [(sum(len(g) for g in c), [sorted(g) for g in c]) for c in cands]
    assert keys == sorted(keys)


def test_candidate_guesses_include_every_replacement_relation():
    problem = Problem.from_formula(parse_formula(NESTED))
    ctx = Context(problem.working)
    env = initial_env(problem, [None] * len(problem.memberships))
    step = env.next_vertex()
    (cx,) = env.of("x")
    cands = {c[0] for c in candidate_guesses(env, step, problem, ctx)}
    useful_rows = cx.graph.reachable([p for p, _ in cx.pairs])
    useful_cols = cx.graph.coreachable(frozenset().union(*(e for _, e in cx.pairs)))
    for z in ("", "10", "1010", "101010"):
        rel = frozenset((q, r) for q, r in relation(cx.graph, z) if q in useful_rows and r in useful_cols)
        assert rel in cands


def test_trace_dump():
    trace = GuessTrace((0, None)).extend("x", (TZ,)).extend("y", (frozenset(), frozenset({(0, 1)})))
    assert trace.dump().splitlines() == ["finals 0 *", "eliminate x {(0,0),(1,2)}", "eliminate y {} {(0,1)}"]


def test_handbuilt_membership_automata():
    assert BLOCKS_0101.accepts("0101") and not BLOCKS_0101.accepts("01010")
    assert ZEROS_THEN_ONES.accepts("0011") and not ZEROS_THEN_ONES.accepts("10")
