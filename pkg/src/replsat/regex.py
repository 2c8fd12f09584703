"""Regular expression syntax trees and a small parser.

Concrete syntax::

    e ::= e + e        union (commutative)
        | e e          concatenation by juxtaposition
        | e*           Kleene star
        | e?           sugar for (e + ())
        | ()           the empty word
        | {}           the empty language
        | (e)          grouping
        | "abc"        quoted literal string ("" is the empty word)
        | a            any other single code point, \\x escapes one

Whitespace between tokens is ignored.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Union as _U

SPECIAL = set('()+*?"\\{}')


class RegexSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position


@dataclass(frozen=True)
class Empty:
    def __str__(self) -> str:
        return "{}"


@dataclass(frozen=True)
class Epsilon:
    def __str__(self) -> str:
        return "()"


@dataclass(frozen=True)
class Lit:
    symbol: str

    def __str__(self) -> str:
        s = self.symbol
        if s in SPECIAL or s.isspace():
            return "\\" + s
        return s


@dataclass(frozen=True)
class Union:
    left: "Regex"
    right: "Regex"

    def __str__(self) -> str:
        return f"{self.left}+{self.right}"


@dataclass(frozen=True)
class Concat:
    left: "Regex"
    right: "Regex"

    def __str__(self) -> str:
        def wrap(r: Regex) -> str:
            return f"({r})" if isinstance(r, Union) else str(r)

        return wrap(self.left) + wrap(self.right)


@dataclass(frozen=True)
class Star:
    inner: "Regex"

    def __str__(self) -> str:
        if isinstance(self.inner, (Lit, Epsilon, Empty)):
            return f"{self.inner}*"
        return f"({self.inner})*"


Regex = _U[Empty, Epsilon, Lit, Union, Concat, Star]


def literal(word: str) -> Regex:
    """Regex denoting exactly ``word``."""
    if not word:
        return Epsilon()
    node: Regex = Lit(word[0])
    for ch in word[1:]:
        node = Concat(node, Lit(ch))
    return node


def union_of(parts: Iterable[Regex]) -> Regex:
    parts = list(parts)
    if not parts:
        return Empty()
    node = parts[0]
    for p in parts[1:]:
        node = Union(node, p)
    return node


def symbols(r: Regex) -> set[str]:
    if isinstance(r, Lit):
        return {r.symbol}
    if isinstance(r, (Union, Concat)):
        return symbols(r.left) | symbols(r.right)
    if isinstance(r, Star):
        return symbols(r.inner)
    return set()


def nullable(r: Regex) -> bool:
    """True iff the empty word is in the language of ``r``."""
    if isinstance(r, (Epsilon, Star)):
        return True
    if isinstance(r, Union):
        return nullable(r.left) or nullable(r.right)
    if isinstance(r, Concat):
        return nullable(r.left) and nullable(r.right)
    return False


def size(r: Regex) -> int:
    """Number of syntax tree nodes."""
    if isinstance(r, (Union, Concat)):
        return 1 + size(r.left) + size(r.right)
    if isinstance(r, Star):
        return 1 + size(r.inner)
    return 1


def constant_word(r: Regex) -> str | None:
    """The word ``r`` denotes if it is a concatenation of literals, else None."""
    if isinstance(r, Epsilon):
        return ""
    if isinstance(r, Lit):
        return r.symbol
    if isinstance(r, Concat):
        left, right = constant_word(r.left), constant_word(r.right)
        if left is not None and right is not None:
            return left + right
    return None


def _tokens(text: str) -> Iterator[tuple[str, str, int]]:
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch == "\\":
            if i + 1 >= len(text):
                raise RegexSyntaxError("dangling escape", i)
            yield "lit", text[i + 1], i
            i += 2
        elif ch == '"':
            j = i + 1
            buf = []
            while j < len(text) and text[j] != '"':
                if text[j] == "\\" and j + 1 < len(text):
                    j += 1
                buf.append(text[j])
                j += 1
            if j >= len(text):
                raise RegexSyntaxError("unterminated string", i)
            yield "str", "".join(buf), i
            i = j + 1
        elif ch in "()+*?{}":
            if ch == "{":
                if text[i + 1 : i + 2] != "}":
                    raise RegexSyntaxError("expected '}'", i + 1)
                yield "empty", "{}", i
                i += 2
                continue
            if ch == "}":
                raise RegexSyntaxError("unexpected '}'", i)
            yield ch, ch, i
            i += 1
        else:
            yield "lit", ch, i
            i += 1


class _Parser:
    def __init__(self, text: str):
        self.toks = list(_tokens(text))
        self.pos = 0
        self.end = len(text)

    def peek(self) -> str | None:
        return self.toks[self.pos][0] if self.pos < len(self.toks) else None

    def where(self) -> int:
        return self.toks[self.pos][2] if self.pos < len(self.toks) else self.end

    def take(self) -> tuple[str, str, int]:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def union(self) -> Regex:
        node = self.concat()
        while self.peek() == "+":
            self.take()
            node = Union(node, self.concat())
        return node

    def concat(self) -> Regex:
        if self.peek() in (None, "+", ")"):
            raise RegexSyntaxError("expected an expression", self.where())
        node = self.postfix()
        while self.peek() not in (None, "+", ")"):
            node = Concat(node, self.postfix())
        return node

    def postfix(self) -> Regex:
        node = self.atom()
        while self.peek() in ("*", "?"):
            kind = self.take()[0]
            node = Star(node) if kind == "*" else Union(node, Epsilon())
        return node

    def atom(self) -> Regex:
        kind, value, at = self.take()
        if kind == "lit":
            return Lit(value)
        if kind == "str":
            return literal(value)
        if kind == "empty":
            return Empty()
        if kind == "(":
            if self.peek() == ")":
                self.take()
                return Epsilon()
            node = self.union()
            if self.peek() != ")":
                raise RegexSyntaxError("expected ')'", self.where())
            self.take()
            return node
        raise RegexSyntaxError(f"unexpected {value!r}", at)


def parse_regex(text: str, alphabet: Iterable[str] | None = None) -> Regex:
    """Parse ``text``; if ``alphabet`` is given every literal must belong to it."""
    p = _Parser(text)
    if not p.toks:
        raise RegexSyntaxError("empty regular expression", 0)
    node = p.union()
    if p.pos != len(p.toks):
        raise RegexSyntaxError(f"unexpected {p.toks[p.pos][1]!r}", p.where())
    if alphabet is not None:
        allowed = set(alphabet)
        for tok_kind, value, at in p.toks:
            if tok_kind in ("lit", "str"):
                for ch in value if tok_kind == "str" else [value]:
                    if ch not in allowed:
                        raise RegexSyntaxError(f"symbol {ch!r} not in alphabet", at)
    return node
