"""Straight-line replaceall constraints: syntax, parsing and graph statistics.

A formula is a list of definitions ``x := replaceall(y, pattern, z)`` or
``x := y . z`` plus regular memberships ``assert x in /RE/``. Definitions
are a conjunction, so their textual order does not matter as long as the
"defined-by" relation is acyclic.

Names containing ``$`` are introduced internally (concat flattening and
desugaring) and are hidden from reported models. Constant terms get their
own graph vertices named like ``"ab"#3``.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Iterator, Union

from . import regex as rx

FRESH_BASE = 0xE000

VAR_PATTERN_REASON = (
    "undecidable: replaceall with a variable as pattern "
    "(reduction from the Post correspondence problem)"
)
EXTENSION_REASONS = {
    "length": "undecidable: replaceall with an integer constraint such as len(x) = len(y) "
    "(reduction from Hilbert's tenth problem)",
    "char": "undecidable: replaceall with character constraints x[i] = y[j] "
    "(they encode len(x) = len(y); reduction from Hilbert's tenth problem)",
    "indexof": "undecidable: replaceall with indexof constraints under first-occurrence "
    "semantics (they encode len(x) = len(y); reduction from Hilbert's tenth problem)",
}


class FormulaError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class StraightLineError(FormulaError):
    def __init__(self, message: str, variable: str):
        super().__init__(message)
        self.variable = variable


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    word: str

    def __str__(self) -> str:
        return _quote(self.word)


Term = Union[Var, Const]


@dataclass(frozen=True)
class ConstPattern:
    word: str

    def __str__(self) -> str:
        return _quote(self.word)


@dataclass(frozen=True)
class RegexPattern:
    regex: rx.Regex

    def __str__(self) -> str:
        return "/" + str(self.regex).replace("/", "\\/") + "/"


@dataclass(frozen=True)
class VarPattern:
    name: str

    def __str__(self) -> str:
        return self.name


Pattern = Union[ConstPattern, RegexPattern, VarPattern]


@dataclass(frozen=True)
class ReplaceAll:
    subject: Term
    pattern: Pattern
    replacement: Term

    def terms(self) -> tuple[Term, Term]:
        return (self.subject, self.replacement)

    def __str__(self) -> str:
        return f"replaceall({self.subject}, {self.pattern}, {self.replacement})"


@dataclass(frozen=True)
class Concat:
    left: Term
    right: Term

    def terms(self) -> tuple[Term, Term]:
        return (self.left, self.right)

    def __str__(self) -> str:
        return f"{self.left} . {self.right}"


Rhs = Union[ReplaceAll, Concat]


@dataclass(frozen=True)
class Definition:
    var: str
    rhs: Rhs

    def referenced(self) -> list[str]:
        names = [t.name for t in self.rhs.terms() if isinstance(t, Var)]
        if isinstance(self.rhs, ReplaceAll) and isinstance(self.rhs.pattern, VarPattern):
            names.append(self.rhs.pattern.name)
        return names


@dataclass(frozen=True)
class Membership:
    var: str
    regex: rx.Regex


@dataclass(frozen=True)
class Extension:
    kind: str  # "length", "char" or "indexof"
    text: str


@dataclass(frozen=True)
class Formula:
    alphabet: tuple[str, ...]
    definitions: tuple[Definition, ...] = ()
    memberships: tuple[Membership, ...] = ()
    extensions: tuple[Extension, ...] = ()
    fresh: tuple[str, ...] = ()

    @property
    def working_alphabet(self) -> tuple[str, ...]:
        return self.alphabet + self.fresh

    @cached_property
    def variables(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for d in self.definitions:
            seen.setdefault(d.var)
            for name in d.referenced():
                seen.setdefault(name)
        for m in self.memberships:
            seen.setdefault(m.var)
        return tuple(seen)

    @cached_property
    def defined(self) -> frozenset[str]:
        return frozenset(d.var for d in self.definitions)

    @property
    def sources(self) -> tuple[str, ...]:
        return tuple(v for v in self.variables if v not in self.defined)

    def definition_of(self, var: str) -> Definition | None:
        for d in self.definitions:
            if d.var == var:
                return d
        return None

    def __str__(self) -> str:
        return format_formula(self)


def is_hidden(name: str) -> bool:
    return "$" in name


def _quote(word: str) -> str:
    return '"' + word.replace("\\", "\\\\").replace('"', '\\"') + '"'


def format_formula(f: Formula) -> str:
    lines = [f"alphabet {_quote(''.join(f.working_alphabet))};"]
    for d in f.definitions:
        lines.append(f"{d.var} := {d.rhs};")
    for m in f.memberships:
        lines.append(f"assert {m.var} in {RegexPattern(m.regex)};")
    for e in f.extensions:
        lines.append(f"assert {e.text};")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(
    r"""
    (?P<nl>\n)
  | (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<num>\d+)
  | (?P<str>"(?:[^"\\\n]|\\.)*")
  | (?P<re>/(?:[^/\\\n]|\\.)*/)
  | (?P<op>:=|<=|>=|[=<>(),.;\[\]+\-])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int


def _lex(text: str) -> list[_Tok]:
    toks, pos, line = [], 0, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise FormulaError(f"unexpected character {text[pos]!r}", line)
        kind = m.lastgroup
        if kind == "nl":
            toks.append(_Tok("end", "\n", line))
            line += 1
        elif kind == "op" and m.group() == ";":
            toks.append(_Tok("end", ";", line))
        elif kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), line))
        pos = m.end()
    toks.append(_Tok("end", "", line))
    return toks


def _unquote(tok: str) -> str:
    return re.sub(r"\\(.)", r"\1", tok[1:-1])


class _FormulaParser:
    def __init__(self, text: str):
        self.toks = _lex(text)
        self.i = 0
        self.alphabet: str | None = None
        self.declared: set[str] | None = None
        self.defs: list[Definition] = []
        self.members: list[Membership] = []
        self.exts: list[Extension] = []
        self.regex_texts: list[tuple[str, int]] = []
        self.temp = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind: str, text: str | None = None) -> _Tok:
        t = self.next()
        if t.kind != kind or (text is not None and t.text != text):
            want = text or kind
            got = "end of statement" if t.kind == "end" else repr(t.text)
            raise FormulaError(f"expected {want!r}, got {got}", t.line)
        return t

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    def parse(self) -> None:
        while self.i < len(self.toks):
            if self.at("end"):
                self.i += 1
                continue
            self.statement()
            self.expect("end")

    def statement(self) -> None:
        t = self.tok
        if self.at("ident", "alphabet"):
            self.next()
            if self.alphabet is not None:
                raise FormulaError("alphabet declared twice", t.line)
            self.alphabet = _unquote(self.expect("str").text)
        elif self.at("ident", "var"):
            self.next()
            names = [self.expect("ident").text]
            while self.at("op", ","):
                self.next()
                names.append(self.expect("ident").text)
            self.declared = (self.declared or set()) | set(names)
        elif self.at("ident", "assert"):
            self.next()
            self.assertion()
        elif t.kind == "ident":
            self.definition()
        else:
            raise FormulaError(f"unexpected {t.text!r}", t.line)

    def assertion(self) -> None:
        start = self.i
        if self.at("ident") and self.toks[self.i + 1].kind == "ident" and self.toks[self.i + 1].text == "in":
            var = self.next().text
            self.next()
            self.members.append(Membership(var, self.regex(self.expect("re"))))
            return
        while not self.at("end"):
            self.next()
        body = self.toks[start : self.i]
        words = [t.text for t in body]
        text = _join_tokens(body)
        if "indexof" in words:
            kind = "indexof"
        elif "len" in words:
            kind = "length"
        elif "[" in words:
            kind = "char"
        else:
            raise FormulaError(f"unrecognised assertion {text!r}", body[0].line if body else None)
        self.exts.append(Extension(kind, text))

    def regex(self, tok: _Tok) -> rx.Regex:
        try:
            r = rx.parse_regex(tok.text[1:-1])
        except rx.RegexSyntaxError as exc:
            raise FormulaError(f"bad regular expression {tok.text}: {exc}", tok.line) from None
        self.regex_texts.append((tok.text, tok.line))
        return r

    def term(self) -> Term:
        t = self.next()
        if t.kind == "ident":
            return Var(t.text)
        if t.kind == "str":
            return Const(_unquote(t.text))
        raise FormulaError(f"expected a variable or string, got {t.text!r}", t.line)

    def definition(self) -> None:
        var_tok = self.next()
        self.expect("op", ":=")
        if self.at("ident", "replaceall") and self.toks[self.i + 1].text == "(":
            self.next()
            self.expect("op", "(")
            subject = self.term()
            self.expect("op", ",")
            p = self.next()
            if p.kind == "re":
                pattern: Pattern = RegexPattern(self.regex(p))
            elif p.kind == "str":
                pattern = ConstPattern(_unquote(p.text))
            elif p.kind == "ident":
                pattern = VarPattern(p.text)
            else:
                raise FormulaError(f"bad pattern {p.text!r}", p.line)
            self.expect("op", ",")
            replacement = self.term()
            self.expect("op", ")")
            self.add(Definition(var_tok.text, ReplaceAll(subject, pattern, replacement)), var_tok.line)
            return
        tree = self.concat_expr()
        if not isinstance(tree, tuple):
            raise FormulaError("a definition needs replaceall(...) or a concatenation", var_tok.line)
        self.add_concat(var_tok.text, tree, var_tok.line)

    def concat_expr(self):
        node = self.concat_atom()
        while self.at("op", "."):
            self.next()
            node = (node, self.concat_atom())
        return node

    def concat_atom(self):
        if self.at("op", "("):
            self.next()
            node = self.concat_expr()
            self.expect("op", ")")
            return node
        return self.term()

    def add_concat(self, var: str, tree, line: int) -> None:
        left, right = (self.flatten(side, var, line) for side in tree)
        self.add(Definition(var, Concat(left, right)), line)

    def flatten(self, node, owner: str, line: int) -> Term:
        if not isinstance(node, tuple):
            return node
        self.temp += 1
        name = f"{owner}$t{self.temp}"
        self.add_concat(name, node, line)
        return Var(name)

    def add(self, d: Definition, line: int) -> None:
        if any(e.var == d.var for e in self.defs):
            raise FormulaError(f"variable {d.var} defined twice", line)
        self.defs.append(d)

    def build(self) -> Formula:
        used: set[str] = set()
        consts: list[str] = []
        regexes = [m.regex for m in self.members]
        for d in self.defs:
            used.add(d.var)
            used.update(d.referenced())
            consts.extend(t.word for t in d.rhs.terms() if isinstance(t, Const))
            if isinstance(d.rhs, ReplaceAll):
                p = d.rhs.pattern
                if isinstance(p, ConstPattern):
                    consts.append(p.word)
                elif isinstance(p, RegexPattern):
                    regexes.append(p.regex)
        used.update(m.var for m in self.members)
        if self.declared is not None:
            missing = sorted(v for v in used if not is_hidden(v) and v not in self.declared)
            if missing:
                raise FormulaError(f"undeclared variable {missing[0]}")
        syms = set("".join(consts)).union(*(rx.symbols(r) for r in regexes))
        if self.alphabet is None:
            alphabet = tuple(sorted(syms))
        else:
            alphabet = tuple(dict.fromkeys(self.alphabet))
            stray = sorted(syms - set(alphabet))
            if stray:
                raise FormulaError(f"symbol {stray[0]!r} is not in the alphabet")
        return Formula(alphabet, tuple(self.defs), tuple(self.members), tuple(self.exts))


def _join_tokens(toks: list[_Tok]) -> str:
    text = " ".join(t.text for t in toks)
    text = re.sub(r"\s+([)\],\[(])", r"\1", text)
    return re.sub(r"([(\[])\s+", r"\1", text)


def parse_formula(text: str) -> Formula:
    p = _FormulaParser(text)
    p.parse()
    return p.build()


# ---------------------------------------------------------------- rewriting


def fresh_letters(alphabet: Iterable[str], count: int) -> tuple[str, ...]:
    taken = set(alphabet)
    out, cp = [], FRESH_BASE
    while len(out) < count:
        if chr(cp) not in taken:
            out.append(chr(cp))
        cp += 1
    return tuple(out)


def desugar_concat(f: Formula) -> Formula:
    """Rewrite every ``x := s1 . s2`` into two replaceall definitions.

    With fresh letters a, b: ``x$c := replaceall("ab", "a", s1)`` then
    ``x := replaceall(x$c, "b", s2)``.
    """
    if not any(isinstance(d.rhs, Concat) for d in f.definitions):
        return f
    a, b = fresh_letters(f.working_alphabet, 2)
    defs: list[Definition] = []
    for d in f.definitions:
        if isinstance(d.rhs, Concat):
            mid = f"{d.var}$c"
            defs.append(Definition(mid, ReplaceAll(Const(a + b), ConstPattern(a), d.rhs.left)))
            defs.append(Definition(d.var, ReplaceAll(Var(mid), ConstPattern(b), d.rhs.right)))
        else:
            defs.append(d)
    return replace(f, definitions=tuple(defs), fresh=f.fresh + (a, b))


def check_straight_line(f: Formula) -> list[Definition]:
    """Definitions in an order where each one only uses earlier ones.

    Already-ordered input is returned unchanged. Raises StraightLineError on
    self-reference or a cycle.
    """
    by_var = {d.var: d for d in f.definitions}
    state: dict[str, int] = {}  # 1 = on stack, 2 = done
    order: list[Definition] = []

    for root in f.definitions:
        if state.get(root.var) == 2:
            continue
        state[root.var] = 1
        stack = [(root, iter(root.referenced()))]
        while stack:
            d, it = stack[-1]
            for name in it:
                if name not in by_var:
                    continue
                if name == d.var:
                    raise StraightLineError(f"{name} is defined in terms of itself", name)
                s = state.get(name)
                if s == 1:
                    raise StraightLineError(f"cyclic definition through {name}", name)
                if s is None:
                    state[name] = 1
                    stack.append((by_var[name], iter(by_var[name].referenced())))
                    break
            else:
                stack.pop()
                state[d.var] = 2
                order.append(d)
    return order


# ---------------------------------------------------------------- dependency graph


@dataclass(frozen=True)
class DepEdge:
    source: str
    side: str  # "l" (subject) or "r" (replacement)
    pattern: Pattern
    target: str


@dataclass(frozen=True)
class DepGraph:
    vertices: tuple[str, ...]
    edges: tuple[DepEdge, ...]
    constants: tuple[tuple[str, str], ...] = ()  # vertex name -> word

    @cached_property
    def out(self) -> dict[str, list[DepEdge]]:
        m: dict[str, list[DepEdge]] = {v: [] for v in self.vertices}
        for e in self.edges:
            m[e.source].append(e)
        return m

    @cached_property
    def topo(self) -> list[str]:
        """Vertices with every edge source before its target."""
        indeg = {v: 0 for v in self.vertices}
        for e in self.edges:
            indeg[e.target] += 1
        ready = [v for v in self.vertices if indeg[v] == 0]
        order = []
        while ready:
            v = ready.pop(0)
            order.append(v)
            for e in self.out[v]:
                indeg[e.target] -= 1
                if indeg[e.target] == 0:
                    ready.append(e.target)
        if len(order) != len(self.vertices):
            raise ValueError("dependency graph has a cycle")
        return order

    def _longest(self, weight) -> int:
        best: dict[str, int] = {}
        for v in reversed(self.topo):
            best[v] = max((weight(e) + best[e.target] for e in self.out[v]), default=0)
        return max(best.values(), default=0)

    @property
    def depth(self) -> int:
        return self._longest(lambda e: 1)

    def path_count(self, src: str, dst: str) -> int:
        count = {v: 0 for v in self.vertices}
        count[dst] = 1
        for v in reversed(self.topo):
            if v != dst:
                count[v] = sum(count[e.target] for e in self.out[v])
        return count[src]

    def reach(self, v: str) -> set[str]:
        seen, todo = {v}, [v]
        while todo:
            for e in self.out[todo.pop()]:
                if e.target not in seen:
                    seen.add(e.target)
                    todo.append(e.target)
        return seen

    def to_dot(self, name: str = "depgraph") -> str:
        return "\n".join(_depgraph_dot(self, name))


def _depgraph_dot(g: DepGraph, name: str) -> Iterator[str]:
    from .automata import _gvquote

    yield f"digraph {_gvquote(name)} {{"
    for v in g.vertices:
        yield f"  {_gvquote(v)};"
    for e in g.edges:
        label = f"({e.side}, {e.pattern})"
        yield f"  {_gvquote(e.source)} -> {_gvquote(e.target)} [label={_gvquote(label)}];"
    yield "}"


def constant_vertices(f: Formula) -> tuple[list[Definition], dict[str, str]]:
    """Definitions with each constant term replaced by its own fresh vertex."""
    consts: dict[str, str] = {}
    defs = []
    for d in f.definitions:
        def vertex(t: Term) -> Var:
            if isinstance(t, Var):
                return t
            name = f"{_quote(t.word)}#{len(consts) + 1}"
            consts[name] = t.word
            return Var(name)

        if isinstance(d.rhs, ReplaceAll):
            rhs: Rhs = ReplaceAll(vertex(d.rhs.subject), d.rhs.pattern, vertex(d.rhs.replacement))
        else:
            rhs = Concat(vertex(d.rhs.left), vertex(d.rhs.right))
        defs.append(Definition(d.var, rhs))
    return defs, consts


def build_dependency_graph(f: Formula) -> DepGraph:
    defs, consts = constant_vertices(f)
    vertices: dict[str, None] = dict.fromkeys(f.variables)
    edges = []
    for d in defs:
        if not isinstance(d.rhs, ReplaceAll):
            raise ValueError("build_dependency_graph expects a concat-free formula")
        for side, t in (("l", d.rhs.subject), ("r", d.rhs.replacement)):
            vertices.setdefault(t.name)
            edges.append(DepEdge(d.var, side, d.rhs.pattern, t.name))
    return DepGraph(tuple(vertices), tuple(edges), tuple(consts.items()))


def _two_disjoint_paths(g: DepGraph, src: str, dst: str) -> bool:
    """Two distinct src->dst paths sharing no inner vertex (parallel edges count).

    Unit-capacity max flow on the vertex-split graph, stopping at 2.
    """
    # residual capacities keyed by (node, node); vertex v splits into (v,0)->(v,1)
    cap: dict[tuple, int] = {}
    adj: dict[tuple, set] = {}

    def arc(a, b, c):
        cap[(a, b)] = cap.get((a, b), 0) + c
        cap.setdefault((b, a), 0)
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)

    for v in g.vertices:
        arc((v, 0), (v, 1), 2 if v in (src, dst) else 1)
    for e in g.edges:
        arc((e.source, 1), (e.target, 0), 1)
    s, t = (src, 1), (dst, 0)
    flow = 0
    while flow < 2:
        parent = {s: None}
        todo = [s]
        while todo and t not in parent:
            a = todo.pop()
            for b in sorted(adj.get(a, ())):
                if b not in parent and cap[(a, b)] > 0:
                    parent[b] = a
                    todo.append(b)
        if t not in parent:
            break
        b = t
        while parent[b] is not None:
            a = parent[b]
            cap[(a, b)] -= 1
            cap[(b, a)] += 1
            b = a
        flow += 1
    return flow >= 2


def diamonds(g: DepGraph) -> list[tuple[str, str]]:
    out = []
    for z in g.vertices:
        for z2 in sorted(g.reach(z) - {z}, key=g.vertices.index):
            if _two_disjoint_paths(g, z, z2):
                out.append((z, z2))
    return out


def diamond_index(g: DepGraph) -> int:
    """Length of the longest chain of diamonds, each starting at or below the previous end."""
    by_source: dict[str, list[str]] = {}
    for z, z2 in diamonds(g):
        by_source.setdefault(z, []).append(z2)
    # best[v]: longest chain whose first diamond starts somewhere reachable from v
    best: dict[str, int] = {}
    for v in reversed(g.topo):
        here = max((1 + best[z2] for z2 in by_source.get(v, ())), default=0)
        below = max((best[e.target] for e in g.out[v]), default=0)
        best[v] = max(here, below)
    return max(best.values(), default=0)


def l_length(g: DepGraph) -> int:
    """Largest number of subject edges on any path."""
    return g._longest(lambda e: 1 if e.side == "l" else 0)


# ---------------------------------------------------------------- classification


class Fragment(enum.Enum):
    SINGLE_LETTER = "single-letter"
    CONSTANT_STRING = "constant-string"
    REGEX_PATTERN = "regex-pattern"
    VAR_PATTERN = "var-pattern"
    EXTENDED_UNDECIDABLE = "extended-undecidable"


def pattern_word(p: Pattern) -> str | None:
    if isinstance(p, ConstPattern):
        return p.word
    if isinstance(p, RegexPattern):
        return rx.constant_word(p.regex)
    return None


def pattern_fragment(p: Pattern) -> Fragment:
    if isinstance(p, VarPattern):
        return Fragment.VAR_PATTERN
    w = pattern_word(p)
    if w is not None and len(w) == 1:
        return Fragment.SINGLE_LETTER
    if w is not None and len(w) > 1:
        return Fragment.CONSTANT_STRING
    return Fragment.REGEX_PATTERN


@dataclass(frozen=True)
class FragmentClass:
    kind: Fragment
    diamond_index: int = 0
    l_length: int = 0
    depth: int = 0
    advisory: str = ""
    reason: str | None = None

    @property
    def supported(self) -> bool:
        return self.reason is None


def classify(f: Formula) -> FragmentClass:
    for d in f.definitions:
        if isinstance(d.rhs, ReplaceAll) and isinstance(d.rhs.pattern, VarPattern):
            return FragmentClass(Fragment.VAR_PATTERN, reason=VAR_PATTERN_REASON)
    if f.extensions:
        return FragmentClass(
            Fragment.EXTENDED_UNDECIDABLE, reason=EXTENSION_REASONS[f.extensions[0].kind]
        )
    rank = [Fragment.SINGLE_LETTER, Fragment.CONSTANT_STRING, Fragment.REGEX_PATTERN]
    kind = Fragment.SINGLE_LETTER
    for d in f.definitions:
        if isinstance(d.rhs, ReplaceAll):
            k = pattern_fragment(d.rhs.pattern)
            kind = max(kind, k, key=rank.index)
    try:
        check_straight_line(f)
    except StraightLineError as exc:
        return FragmentClass(kind, reason=f"not straight-line: {exc}")
    g = build_dependency_graph(desugar_concat(f))
    di, ll, depth = diamond_index(g), l_length(g), g.depth
    if kind is Fragment.SINGLE_LETTER:
        advisory = (
            f"single-letter patterns: PSPACE when the diamond index ({di}) is bounded, "
            "EXPSPACE in general"
        )
    elif kind is Fragment.CONSTANT_STRING:
        advisory = (
            f"constant-string patterns: PSPACE when the l-length ({ll}) is bounded, "
            "EXPSPACE in general"
        )
    else:
        advisory = (
            "regular-expression patterns: PSPACE since l-length <= 1"
            if ll <= 1
            else f"regular-expression patterns: EXPSPACE (l-length {ll})"
        )
    return FragmentClass(kind, di, ll, depth, advisory)
