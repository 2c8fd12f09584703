"""Command-line interface.

Exit codes: 0 sat, 1 unsat, 2 unsupported, 3 resource-out, 4 input error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from dataclasses import dataclass, field

from . import model as m
from . import regex as rx
from .automata import compile_regex
from .elimination import PatternSpec
from .generate import random_formula
from .oracle import brute_force_sat
from .parsing import parsing_automaton
from .semantics import replace_all
from .solver import SearchLimits, solve

EXIT_CODES = {"sat": 0, "unsat": 1, "unsupported": 2, "resource-out": 3}
INPUT_ERROR = 4
STAT_ORDER = (
    "reason",
    "fragment",
    "diamond-index",
    "l-length",
    "depth",
    "advisory",
    "branches",
    "rewrites",
    "largest_automaton",
    "constraints",
    "time-ms",
)


@dataclass
class RunReport:
    verdict: str
    model: dict[str, str] = field(default_factory=dict)
    stats: dict[str, object] = field(default_factory=dict)

    def format(self) -> str:
        lines = [f"verdict: {self.verdict}"]
        for var in sorted(self.model):
            lines.append(f"model {var} = {json.dumps(self.model[var], ensure_ascii=False)}")
        rank = {k: i for i, k in enumerate(STAT_ORDER)}
        for key in sorted(self.stats, key=lambda k: (rank.get(k, len(rank)), k)):
            value = self.stats[key]
            text = str(value) if isinstance(value, int) else json.dumps(str(value), ensure_ascii=False)
            lines.append(f"stat {key} = {text}")
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "RunReport":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("verdict: "):
            raise ValueError("report must start with a verdict line")
        report = cls(lines[0][len("verdict: ") :])
        for line in lines[1:]:
            kind, rest = line.split(" ", 1)
            key, value = rest.split(" = ", 1)
            if kind == "model":
                report.model[key] = json.loads(value)
            elif kind == "stat":
                report.stats[key] = json.loads(value)
            else:
                raise ValueError(f"unknown record {line!r}")
        return report


def _read_formula(path: str) -> m.Formula:
    with open(path, encoding="utf-8") as fh:
        return m.parse_formula(fh.read())


def cmd_solve(args) -> int:
    f = _read_formula(args.file)
    limits = SearchLimits(
        max_product_states=args.max_product_states,
        max_branches=args.max_branches,
        timeout_ms=args.timeout_ms,
        defer_finals=args.defer_finals,
    )
    start = time.perf_counter()
    verdict = solve(f, limits, parallel=args.parallel)
    elapsed = time.perf_counter() - start
    stats = dict(verdict.stats)
    if verdict.reason:
        stats["reason"] = verdict.reason
    if args.timing:
        stats["time-ms"] = round(elapsed * 1000)
    model = {}
    if verdict.model:
        model = {v: w for v, w in verdict.model.items() if not m.is_hidden(v)}
    sys.stdout.write(RunReport(verdict.kind, model, stats).format())
    if args.trace and verdict.trace is not None:
        sys.stderr.write(verdict.trace.dump() + "\n")
    return EXIT_CODES[verdict.kind]


def cmd_eval(args) -> int:
    if args.literal or args.pattern == "":
        pattern: rx.Regex | str = args.pattern
    else:
        pattern = rx.parse_regex(args.pattern)
    print(replace_all(args.subject, pattern, args.replacement))
    return 0


def cmd_classify(args) -> int:
    f = _read_formula(args.file)
    c = m.classify(f)
    if c.reason:
        print(f"{c.kind.value}; unsupported: {c.reason}")
        return EXIT_CODES["unsupported"]
    print(
        f"{c.kind.value}; diamond-index {c.diamond_index}; l-length {c.l_length}; "
        f"depth {c.depth}; advisory: {c.advisory}"
    )
    return 0


def cmd_dot(args) -> int:
    f = _read_formula(args.file)
    target = args.target
    if target == "depgraph":
        print(m.build_dependency_graph(m.desugar_concat(f)).to_dot())
        return 0
    if target == "membership" or target.startswith("membership:"):
        picks = list(enumerate(f.memberships))
        if ":" in target:
            idx = int(target.split(":", 1)[1])
            if not 0 <= idx < len(picks):
                raise LookupError(f"no membership number {idx}")
            picks = [picks[idx]]
        for i, mb in picks:
            print(compile_regex(mb.regex).to_dot(f"{mb.var} in {m.RegexPattern(mb.regex)} #{i}"))
        return 0
    if target.startswith("parser:"):
        var = target.split(":", 1)[1]
        d = f.definition_of(var)
        if d is None or not isinstance(d.rhs, m.ReplaceAll):
            raise LookupError(f"no replaceall definition for {var}")
        spec = PatternSpec.of(d.rhs.pattern)
        if spec.kind in ("letter", "epsilon"):
            raise LookupError(f"the pattern of {var} needs no parsing automaton")
        pat = spec.word if spec.kind == "const" else spec.regex
        print(parsing_automaton(pat, f.alphabet).to_dot(f"parser for {spec}"))
        return 0
    raise LookupError(f"unknown dot target {target!r}")


def cmd_oracle(args) -> int:
    f = _read_formula(args.file)
    res = brute_force_sat(f, args.max_len)
    if res.is_sat:
        report = RunReport("sat", {v: w for v, w in res.model.items() if not m.is_hidden(v)})
    else:
        report = RunReport("unknown", stats={"no-witness-up-to": res.max_len})
    sys.stdout.write(report.format())
    return 0 if res.is_sat else 1


def cmd_gen(args) -> int:
    rng = random.Random(args.seed)
    f = random_formula(rng, max_defs=args.defs, concat=args.concat)
    sys.stdout.write(m.format_formula(f))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="replsat", description="Straight-line replaceall constraint solver")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="decide a constraint file")
    s.add_argument("file")
    s.add_argument("--max-product-states", type=int, default=200_000)
    s.add_argument("--max-branches", type=int, default=100_000)
    s.add_argument("--timeout-ms", type=int, default=60_000)
    s.add_argument("--parallel", action="store_true", help="explore final-state branches in threads")
    s.add_argument("--defer-finals", action="store_true", help="keep all final states instead of branching")
    s.add_argument("--timing", action="store_true", help="add wall-clock time to the report")
    s.add_argument("--trace", action="store_true", help="print the guess trace to stderr")
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("eval", help="evaluate replaceall(subject, pattern, replacement)")
    e.add_argument("subject")
    e.add_argument("pattern", help="regex; '' is the empty-word pattern")
    e.add_argument("replacement")
    e.add_argument("--literal", action="store_true", help="treat the pattern as a constant word")
    e.set_defaults(func=cmd_eval)

    c = sub.add_parser("classify", help="fragment, graph statistics and complexity note")
    c.add_argument("file")
    c.set_defaults(func=cmd_classify)

    d = sub.add_parser("dot", help="Graphviz export")
    d.add_argument("file")
    d.add_argument("target", help="depgraph | membership[:N] | parser:VAR")
    d.set_defaults(func=cmd_dot)

    o = sub.add_parser("oracle", help="bounded brute-force search")
    o.add_argument("file")
    o.add_argument("--max-len", type=int, default=4)
    o.set_defaults(func=cmd_oracle)

    g = sub.add_parser("gen", help="print a random formula")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--defs", type=int, default=2)
    g.add_argument("--concat", action="store_true")
    g.set_defaults(func=cmd_gen)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, LookupError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
