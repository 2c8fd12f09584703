"""Random instances for differential testing."""

from __future__ import annotations

import random

from . import model as m
from . import regex as rx
from .automata import compile_regex


def random_regex(rng: random.Random, alphabet: str, size: int) -> rx.Regex:
    """Random regex with at most ``size`` syntax nodes."""
    if size <= 1:
        return rx.Lit(rng.choice(alphabet)) if rng.random() < 0.9 else rx.Epsilon()
    if size == 2:
        return rx.Star(random_regex(rng, alphabet, 1))
    op = rng.choice("+.*.")
    if op == "*":
        return rx.Star(random_regex(rng, alphabet, size - 1))
    left = rng.randint(1, size - 2)
    a, b = random_regex(rng, alphabet, left), random_regex(rng, alphabet, size - 1 - left)
    return rx.Union(a, b) if op == "+" else rx.Concat(a, b)


def random_nonnullable_regex(rng: random.Random, alphabet: str, size: int) -> rx.Regex:
    while True:
        r = random_regex(rng, alphabet, rng.randint(1, size))
        if not rx.nullable(r) and not compile_regex(r).is_empty():
            return r


def random_word(rng: random.Random, alphabet: str, max_len: int, min_len: int = 0) -> str:
    return "".join(rng.choice(alphabet) for _ in range(rng.randint(min_len, max_len)))


def random_membership_regex(rng: random.Random, alphabet: str, max_states: int) -> rx.Regex:
    while True:
        r = random_regex(rng, alphabet, rng.randint(1, 7))
        if compile_regex(r).n <= max_states:
            return r


def random_pattern(rng: random.Random, alphabet: str, kinds: str = "lcre") -> m.Pattern:
    kind = rng.choice(kinds)
    if kind == "l":
        return m.ConstPattern(rng.choice(alphabet))
    if kind == "c":
        return m.ConstPattern(random_word(rng, alphabet, 3, 2))
    if kind == "e":
        if rng.random() < 0.3:
            return m.ConstPattern("")
        return m.RegexPattern(random_regex(rng, alphabet, rng.randint(1, 4)))
    return m.RegexPattern(random_nonnullable_regex(rng, alphabet, 5))


def random_formula(
    rng: random.Random,
    alphabet: str = "01",
    max_defs: int = 2,
    max_members: int = 3,
    max_states: int = 4,
    kinds: str = "lcre",
    concat: bool = False,
) -> m.Formula:
    """Straight-line formula; ``kinds`` picks patterns: letter, const, regex, e(nullable)."""
    n_defs = rng.randint(1, max_defs)
    n_src = rng.randint(1, 3)
    sources = [f"s{i}" for i in range(n_src)]
    pool = list(sources)
    defs = []
    for i in range(n_defs):
        var = f"x{i}"

        def term() -> m.Term:
            if rng.random() < 0.1:
                return m.Const(random_word(rng, alphabet, 2))
            return m.Var(rng.choice(pool))

        if concat and rng.random() < 0.5:
            rhs: m.Rhs = m.Concat(term(), term())
        else:
            rhs = m.ReplaceAll(term(), random_pattern(rng, alphabet, kinds), term())
        defs.append(m.Definition(var, rhs))
        pool.append(var)
    members = []
    candidates = [d.var for d in defs] + sources
    for _ in range(rng.randint(1, max_members)):
        var = candidates[0] if not members else rng.choice(candidates)
        members.append(m.Membership(var, random_membership_regex(rng, alphabet, max_states)))
    f = m.Formula(tuple(alphabet), tuple(defs), tuple(members))
    return f


def random_dependency_graph(rng: random.Random, max_vertices: int = 7) -> m.DepGraph:
    """Random DAG where each inner vertex has one l-edge and one r-edge to later vertices."""
    n = rng.randint(1, max_vertices)
    names = [f"v{i}" for i in range(n)]
    edges = []
    pat = m.ConstPattern("a")
    for i in range(n - 1):
        if rng.random() < 0.75:
            for side in "lr":
                edges.append(m.DepEdge(names[i], side, pat, names[rng.randint(i + 1, n - 1)]))
    return m.DepGraph(tuple(names), tuple(edges))
