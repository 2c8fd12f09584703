import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from replsat import model as m
from replsat.generate import random_dependency_graph, random_formula
from replsat.oracle import brute_force_sat
from replsat.solver import evaluate

TWO_LETTERS = """
alphabet "01";
x2 := replaceall(x1, "0", y1);
x3 := replaceall(x2, "1", y2);
assert x1 in /0*1*/;
assert y1 in /1*/;
assert x3 in /0(0+1)*/;
"""


def test_parse_two_letter_formula():
    f = m.parse_formula(TWO_LETTERS)
    assert len(f.definitions) == 2 and len(f.memberships) == 3
    assert f.alphabet == ("0", "1")
    assert f.sources == ("x1", "y1", "y2")
    assert [d.var for d in m.check_straight_line(f)] == ["x2", "x3"]


def test_parse_variable_pattern():
    f = m.parse_formula("x := replaceall(y, p, z);")
    assert f.definitions[0].rhs.pattern == m.VarPattern("p")


@pytest.mark.parametrize(
    "text",
    [
        "x := replaceall(y, \"0\", z); x := replaceall(y, \"1\", z);",
        'alphabet "01"; x := replaceall(y, "2", z);',
        "x := replaceall(y, /0(/, z);",
        "var x, y; x := replaceall(y, \"0\", w);",
        "assert x in ;",
        "x := ;",
    ],
)
def test_malformed_formulas(text):
    with pytest.raises(m.FormulaError):
        m.parse_formula(text)


def test_extensions_are_captured():
    f = m.parse_formula('assert len(x) = len(y); assert x[0] = y[1]; assert 0 <= indexof(x, "a");')
    assert [e.kind for e in f.extensions] == ["length", "char", "indexof"]
    assert f.extensions[0].text == "len(x) = len(y)"


def test_comments_newlines_and_primes():
    f = m.parse_formula("# header\nalphabet \"01\"\ny := replaceall(y', \"1\", z') # trailing\nassert y in /(01)*/\n")
    assert f.sources == ("y'", "z'")


def test_format_round_trip():
    f = m.parse_formula(TWO_LETTERS + 'w := x3 . "01";')
    again = m.parse_formula(m.format_formula(f))
    assert again.definitions == f.definitions
    assert again.memberships == f.memberships


# ---------------------------------------------------------------- concat


def test_desugar_concat_shape():
    f = m.desugar_concat(m.parse_formula('alphabet "01"; x := y . z;'))
    assert len(f.definitions) == 2 and len(f.fresh) == 2
    a, b = f.fresh
    first, second = f.definitions
    assert first.rhs == m.ReplaceAll(m.Const(a + b), m.ConstPattern(a), m.Var("y"))
    assert second.rhs == m.ReplaceAll(m.Var(first.var), m.ConstPattern(b), m.Var("z"))
    assert m.is_hidden(first.var)
    assert not set(f.fresh) & set(f.alphabet)


def test_desugar_without_concat_is_identity():
    f = m.parse_formula(TWO_LETTERS)
    assert m.desugar_concat(f) == f


@settings(max_examples=100, deadline=None)
@given(*(st.text(alphabet="01", max_size=4) for _ in range(3)))
def test_nested_concat_evaluates(y, z, w):
    f = m.desugar_concat(m.parse_formula('alphabet "01"; x := (y . z) . w;'))
    assert evaluate(f, {"y": y, "z": z, "w": w})["x"] == y + z + w


def test_desugaring_preserves_oracle_verdicts():
    rng = random.Random(12)
    for _ in range(40):
        f = random_formula(rng, concat=True)
        before = brute_force_sat(f, 3)
        after = brute_force_sat(m.desugar_concat(f), 3)
        assert before.is_sat == after.is_sat
        if after.is_sat:
            assert all(set(w) <= set(f.alphabet) for v, w in after.model.items() if not m.is_hidden(v))


# ---------------------------------------------------------------- straight-line


def test_straight_line_errors():
    with pytest.raises(m.StraightLineError) as exc:
        m.check_straight_line(m.parse_formula('x := replaceall(x, "0", y);'))
    assert exc.value.variable == "x"
    with pytest.raises(m.StraightLineError):
        m.check_straight_line(m.parse_formula('x := replaceall(y, "0", z); y := replaceall(x, "1", z);'))


def test_straight_line_reorders_forward_references():
    f = m.parse_formula('x := replaceall(y, "0", z); y := replaceall(w, "1", z);')
    assert [d.var for d in m.check_straight_line(f)] == ["y", "x"]


def _admits_order(defs):
    """Brute force: some permutation only refers to earlier definitions."""
    for perm in itertools.permutations(defs):
        seen: set[str] = set()
        ok = True
        for d in perm:
            if any(v in {e.var for e in defs} and v not in seen for v in d.referenced()):
                ok = False
                break
            seen.add(d.var)
        if ok:
            return True
    return False


@settings(max_examples=150, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 6), st.integers(0, 6)), min_size=1, max_size=5, unique_by=lambda t: t[0]))
def test_straight_line_matches_permutation_search(rows):
    names = [f"v{i}" for i in range(7)]
    defs = tuple(
        m.Definition(names[x], m.ReplaceAll(m.Var(names[y]), m.ConstPattern("0"), m.Var(names[z])))
        for x, y, z in rows
    )
    f = m.Formula(("0", "1"), defs)
    try:
        order = m.check_straight_line(f)
        accepted = True
    except m.StraightLineError:
        accepted = False
    assert accepted == _admits_order(list(defs))
    if accepted:
        pos = {d.var: i for i, d in enumerate(order)}
        assert all(pos.get(v, -1) < pos[d.var] for d in order for v in d.referenced())


# ---------------------------------------------------------------- dependency graph


def test_dependency_graph_of_two_letter_formula():
    g = m.build_dependency_graph(m.parse_formula(TWO_LETTERS))
    edges = {(e.source, e.side, e.target) for e in g.edges}
    assert edges == {("x2", "l", "x1"), ("x2", "r", "y1"), ("x3", "l", "x2"), ("x3", "r", "y2")}
    assert g.depth == 2


def test_empty_and_parallel_graphs():
    g = m.build_dependency_graph(m.parse_formula("assert x in /0/;"))
    assert g.edges == () and g.depth == 0
    assert (m.diamond_index(g), m.l_length(g)) == (0, 0)
    g = m.build_dependency_graph(m.parse_formula('x := replaceall(y, "0", y);'))
    assert sorted((e.side, e.target) for e in g.edges) == [("l", "y"), ("r", "y")]
    assert m.diamond_index(g) == 1


def test_three_diamond_chain():
    f = m.parse_formula(
        'x1 := replaceall(x2, "a", x2); x2 := replaceall(x3, "a", x3); x3 := replaceall(y1, "a", y1);'
    )
    g = m.build_dependency_graph(f)
    assert m.diamond_index(g) == 3
    assert m.l_length(g) == 3
    assert g.path_count("x1", "y1") == 8


def test_constants_become_own_vertices():
    g = m.build_dependency_graph(m.parse_formula('x := replaceall("ab", "a", "c");'))
    assert len(g.vertices) == 3
    assert sorted(dict(g.constants).values()) == ["ab", "c"]


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9))
def test_diamond_index_at_most_l_length(seed):
    g = random_dependency_graph(random.Random(seed))
    assert m.diamond_index(g) <= m.l_length(g) <= g.depth


# ---------------------------------------------------------------- classification


def test_classification():
    c = m.classify(m.parse_formula(TWO_LETTERS))
    assert (c.kind, c.diamond_index, c.l_length, c.depth) == (m.Fragment.SINGLE_LETTER, 0, 2, 2)
    assert c.supported and "PSPACE" in c.advisory
    assert m.classify(m.parse_formula('x := replaceall(y, "010", z);')).kind == m.Fragment.CONSTANT_STRING
    assert m.classify(m.parse_formula("x := replaceall(y, /0*1/, z);")).kind == m.Fragment.REGEX_PATTERN
    c = m.classify(m.parse_formula("x := replaceall(y, p, z);"))
    assert c.kind == m.Fragment.VAR_PATTERN and not c.supported
    assert "Post correspondence" in c.reason
    c = m.classify(m.parse_formula('x := replaceall(y, "0", z); assert len(x) = len(y);'))
    assert c.kind == m.Fragment.EXTENDED_UNDECIDABLE and "Hilbert" in c.reason


def test_regex_that_is_a_word_counts_as_constant():
    assert m.classify(m.parse_formula("x := replaceall(y, /0/, z);")).kind == m.Fragment.SINGLE_LETTER


def test_cycle_is_unsupported():
    c = m.classify(m.parse_formula('x := replaceall(y, "0", z); y := replaceall(x, "1", z);'))
    assert not c.supported and "straight-line" in c.reason
