"""Small hand-drawn automata shared by several test modules.

State numbers are chosen to match the drawings they are copied from, so
guess sets like {(0, 0), (1, 2)} can be written down literally.
"""

from pathlib import Path

from replsat.automata import Nfa, TransitionGraph

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


def graph(n, edges, labels=None):
    return TransitionGraph(n, frozenset(edges), labels)


# words over {0,1} containing 00 or 11; q1 = "just read 1", q3 = "just read 0"
CONTAINS_DOUBLE = Nfa(
    graph(
        4,
        [
            (0, "0", 0), (0, "1", 0), (0, "1", 1), (1, "1", 2),
            (0, "0", 3), (3, "0", 2), (2, "0", 2), (2, "1", 2),
        ],
        ("q0", "q1", "q2", "q3"),
    ),
    0,
    frozenset([2]),
)

ALTERNATING_01 = Nfa(graph(2, [(0, "0", 1), (1, "1", 0)], ("p0", "p1")), 0, frozenset([0]))
ALTERNATING_10 = Nfa(graph(2, [(0, "1", 1), (1, "0", 0)], ("r0", "r1")), 0, frozenset([0]))

# 0*1*0*1*: blocks s0..s3 (p1 of the drawing is s1)
BLOCKS_0101 = Nfa(
    graph(
        4,
        [(0, "0", 0), (0, "1", 1), (1, "1", 1), (1, "0", 2), (2, "0", 2), (2, "1", 3), (3, "1", 3)],
        ("s0", "s1", "s2", "s3"),
    ),
    0,
    frozenset([0, 1, 2, 3]),
)

ZEROS_THEN_ONES = Nfa(graph(2, [(0, "0", 0), (0, "1", 1), (1, "1", 1)]), 0, frozenset([0, 1]))


def replay_nested_trace():
    """Eliminate x then y of samples/nested.str under the hand-picked guesses.

    Returns the two intermediate environments and the shortest source words.
    """
    from replsat.automata import shortest_witness
    from replsat.elimination import ConstraintEnv, Context, PatternSpec, Step, SuccinctConstraint, eliminate_vertex

    def single(a, ends=None):
        return (SuccinctConstraint.make(a.graph, [(a.initial, a.finals if ends is None else ends)]),)

    steps = (
        Step("y", "y'", PatternSpec("letter", "1"), "z'"),
        Step("x", "y", PatternSpec("letter", "0"), "z"),
    )
    env0 = ConstraintEnv(
        {
            "x": single(CONTAINS_DOUBLE, [2]),
            "y": single(ALTERNATING_01, [0]),
            "z": single(ALTERNATING_10, [0]),
            "y'": single(BLOCKS_0101),
            "z'": single(ZEROS_THEN_ONES),
        },
        steps,
    )
    ctx = Context(("0", "1"))
    env1 = eliminate_vertex(env0, "x", [frozenset({(0, 0), (1, 2)})], ctx)
    env2 = eliminate_vertex(env1, "y", [frozenset({(0, 0)}), frozenset({(0, 1), (1, 2)})], ctx)
    words = {}
    for v in ("y'", "z'", "z"):
        w = shortest_witness([a for c in env2.of(v) for a in c.automata()], ("0", "1"))
        words[v] = None if w is None else w.word
    return env1, env2, words
