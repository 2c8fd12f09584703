"""Decision procedure: classify, eliminate definitions, check source constraints."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping

from . import model as m
from .automata import ResourceExhausted, compile_regex, shortest_witness
from .elimination import (
    ConstraintEnv,
    Context,
    GuessTrace,
    Problem,
    candidate_guesses,
    eliminate_vertex,
    final_choices,
    initial_env,
)
from .semantics import replace_all


class ModelError(AssertionError):
    """An extracted model failed verification; this is a bug, never Unsat."""


@dataclass(frozen=True)
class SearchLimits:
    max_product_states: int = 200_000
    max_branches: int = 100_000
    timeout_ms: int = 60_000
    oracle_max_len: int = 4
    defer_finals: bool = False

    def __post_init__(self):
        for name in ("max_product_states", "max_branches", "timeout_ms", "oracle_max_len"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class Verdict:
    kind: str  # "sat", "unsat", "unsupported", "resource-out"
    model: Mapping[str, str] | None = None
    reason: str | None = None
    stats: Mapping[str, object] = field(default_factory=dict)
    trace: GuessTrace | None = None

    @property
    def is_sat(self) -> bool:
        return self.kind == "sat"


@dataclass(frozen=True)
class ModelCheck:
    ok: bool
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok


class _Budget:
    def __init__(self, limits: SearchLimits):
        self.limits = limits
        self.deadline = time.monotonic() + limits.timeout_ms / 1000
        self.branches = 0

    def tick(self) -> None:
        self.branches += 1
        if self.branches > self.limits.max_branches:
            raise ResourceExhausted(f"max-branches {self.limits.max_branches}")
        if time.monotonic() > self.deadline:
            raise ResourceExhausted(f"timeout {self.limits.timeout_ms} ms")


def evaluate(f: m.Formula, sources: Mapping[str, str]) -> dict[str, str]:
    """Values of all variables given the source values (missing sources are empty)."""
    values = dict(sources)

    def val(t: m.Term) -> str:
        return t.word if isinstance(t, m.Const) else values.get(t.name, "")

    for d in m.check_straight_line(f):
        rhs = d.rhs
        if isinstance(rhs, m.Concat):
            values[d.var] = val(rhs.left) + val(rhs.right)
        else:
            values[d.var] = replace_all(val(rhs.subject), _pattern_regex(rhs.pattern), val(rhs.replacement))
    return values


def _pattern_regex(p: m.Pattern):
    if isinstance(p, m.ConstPattern):
        return p.word
    if isinstance(p, m.RegexPattern):
        return p.regex
    raise ValueError("variable patterns cannot be evaluated")


def verify_model(f: m.Formula, model: Mapping[str, str]) -> ModelCheck:
    """Check every definition and membership; name the first one that fails."""
    for v in f.variables:
        if v not in model:
            raise KeyError(f"variable {v} is not assigned")

    def val(t: m.Term) -> str:
        return t.word if isinstance(t, m.Const) else model[t.name]

    for d in f.definitions:
        rhs = d.rhs
        if isinstance(rhs, m.Concat):
            want = val(rhs.left) + val(rhs.right)
        else:
            want = replace_all(val(rhs.subject), _pattern_regex(rhs.pattern), val(rhs.replacement))
        if model[d.var] != want:
            return ModelCheck(False, f"definition {d.var} := {rhs} gives {want!r}, model has {model[d.var]!r}")
    for mb in f.memberships:
        if not compile_regex(mb.regex).accepts(model[mb.var]):
            return ModelCheck(False, f"membership {mb.var} in {m.RegexPattern(mb.regex)} fails for {model[mb.var]!r}")
    return ModelCheck(True)


def extract_model(env: ConstraintEnv, f: m.Formula, problem: Problem, ctx: Context | None = None) -> dict[str, str]:
    """Shortest witness per source, everything else by evaluation."""
    limit = ctx.max_states if ctx else None
    sources = {}
    for v in problem.sources:
        w = shortest_witness([a for c in env.of(v) for a in c.automata()], problem.alphabet, limit)
        if w is None:
            raise ModelError(f"source {v} has no witness on a successful branch")
        sources[v] = w.word
    values = evaluate(f, sources)
    model = {v: values.get(v, "") for v in f.variables}
    check = verify_model(f, model)
    if not check:
        raise ModelError(f"extracted model does not verify: {check.message}")
    return model


def step_two(env: ConstraintEnv, problem: Problem, ctx: Context) -> bool:
    """Every source's constraints have a common word."""
    todo = [(sum(c.graph.n * len(c.pairs) for c in env.of(v)), v) for v in problem.sources]
    for _, v in sorted(todo):
        if not ctx.satisfiable(env.of(v), problem.alphabet):
            return False
    return True


def _consistent(env: ConstraintEnv, var: str, problem: Problem, ctx: Context) -> bool:
    cs = env.of(var)
    if not cs:
        return True
    if var in problem.constants:
        word = problem.constants[var]
        return all(a.accepts(word) for c in cs for a in c.automata())
    return ctx.satisfiable(cs, problem.letters_for(var))


def solve(f: m.Formula, limits: SearchLimits | None = None, parallel: bool = False) -> Verdict:
    """Decide ``f``.

    With ``parallel`` the per-final-state branches run in a thread pool; the
    reported branch is still the first successful one in canonical order, so
    verdict and model match the sequential run (budgets are per branch).
    """
    limits = limits or SearchLimits()
    cls = m.classify(f)
    stats: dict[str, object] = {
        "fragment": cls.kind.value,
        "diamond-index": cls.diamond_index,
        "l-length": cls.l_length,
        "depth": cls.depth,
    }
    if not cls.supported:
        return Verdict("unsupported", reason=cls.reason, stats=stats)
    problem = Problem.from_formula(f)
    if limits.defer_finals:
        choices = [tuple(None for _ in problem.memberships)]
    else:
        choices = final_choices(problem)

    if parallel and len(choices) > 1:
        with ThreadPoolExecutor() as pool:
            outcomes = list(pool.map(lambda c: _explore(problem, [c], limits), choices))
    else:
        outcomes = [_explore(problem, choices, limits)]
    branches = sum(o[2] for o in outcomes)
    rewrites = sum(o[3].rewrites_built for o in outcomes)
    largest = max(o[3].largest_graph for o in outcomes)
    stats.update(branches=branches, rewrites=rewrites, largest_automaton=largest)
    for result, error, _, ctx in outcomes:
        if error is not None:
            return Verdict("resource-out", reason=error, stats=stats)
        if result:
            env, trace = result
            model = extract_model(env, f, problem, ctx)
            stats["constraints"] = env.total_constraints()
            return Verdict("sat", model=model, stats=stats, trace=trace)
    return Verdict("unsat", stats=stats)


def _explore(problem: Problem, choices, limits: SearchLimits):
    """Depth-first search over the given final-state choices.

    Returns (result or None, budget error or None, branch count, context).
    """
    ctx = Context(problem.working, limits.max_product_states)
    budget = _Budget(limits)

    def search(env: ConstraintEnv, trace: GuessTrace):
        step = env.next_vertex()
        if step is None:
            return (env, trace) if step_two(env, problem, ctx) else None
        for guess in candidate_guesses(env, step, problem, ctx, limits.max_product_states):
            budget.tick()
            nxt = eliminate_vertex(env, step.var, guess, ctx)
            if not (
                _consistent(nxt, step.subject, problem, ctx)
                and _consistent(nxt, step.replacement, problem, ctx)
            ):
                continue
            found = search(nxt, trace.extend(step.var, guess))
            if found:
                return found
        return None

    try:
        for finals in choices:
            budget.tick()
            env = initial_env(problem, finals)
            if not all(_consistent(env, v, problem, ctx) for v in env.constraints):
                continue
            result = search(env, GuessTrace(tuple(finals)))
            if result:
                return result, None, budget.branches, ctx
    except ResourceExhausted as exc:
        return None, str(exc), budget.branches, ctx
    return None, None, budget.branches, ctx
