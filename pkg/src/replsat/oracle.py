"""Bounded brute-force satisfiability by direct evaluation.

Independent of the elimination engine: it enumerates source assignments,
evaluates definitions with ``replace_all`` and checks memberships.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from . import model as m
from .automata import compile_regex, words_up_to
from .semantics import replace_all


@dataclass(frozen=True)
class OracleResult:
    kind: str  # "sat-witness" or "no-witness"
    max_len: int
    model: Mapping[str, str] | None = None

    @property
    def is_sat(self) -> bool:
        return self.kind == "sat-witness"


def brute_force_sat(f: m.Formula, max_len: int) -> OracleResult:
    """First assignment (sources in order, each in length-lex order) that satisfies ``f``.

    Source values range over words of length at most ``max_len`` on the
    formula's declared alphabet.
    """
    if max_len < 0:
        raise ValueError("max_len must be non-negative")
    for d in f.definitions:
        if isinstance(d.rhs, m.ReplaceAll) and isinstance(d.rhs.pattern, m.VarPattern):
            raise ValueError("the oracle needs constant or regex patterns")
    order = m.check_straight_line(f)
    sources = list(f.sources)
    position = {v: i for i, v in enumerate(sources)}

    # a definition can be evaluated once the last source it depends on is set
    level: dict[str, int] = {}
    for d in order:
        deps = [position[n] if n in position else level[n] for n in d.referenced()]
        level[d.var] = max(deps, default=-1)
    by_level: dict[int, list[m.Definition]] = {}
    for d in order:
        by_level.setdefault(level[d.var], []).append(d)

    checks: dict[str, list] = {}
    for mb in f.memberships:
        checks.setdefault(mb.var, []).append(compile_regex(mb.regex))

    values: dict[str, str] = {}

    def val(t: m.Term) -> str:
        return t.word if isinstance(t, m.Const) else values[t.name]

    def settle(k: int) -> bool:
        for d in by_level.get(k, ()):
            rhs = d.rhs
            if isinstance(rhs, m.Concat):
                values[d.var] = val(rhs.left) + val(rhs.right)
            else:
                p = rhs.pattern
                pat = p.word if isinstance(p, m.ConstPattern) else p.regex
                values[d.var] = replace_all(val(rhs.subject), pat, val(rhs.replacement))
            if not all(a.accepts(values[d.var]) for a in checks.get(d.var, ())):
                return False
        return True

    words = list(words_up_to(f.alphabet, max_len))

    def assign(k: int) -> bool:
        if k == len(sources):
            return True
        var = sources[k]
        for w in words:
            values[var] = w
            if all(a.accepts(w) for a in checks.get(var, ())) and settle(k) and assign(k + 1):
                return True
        return False

    if settle(-1) and assign(0):
        return OracleResult("sat-witness", max_len, {v: values[v] for v in f.variables})
    return OracleResult("no-witness", max_len)
