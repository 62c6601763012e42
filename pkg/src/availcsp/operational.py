"""Operational semantics: transition steps, trace extraction, failures.

Availability traces are read off the standard labelled transition system:
a state offers a set of events when every member of the set is enabled
there, so offers appear as self-loops and an observation alternates freely
between transitions taken and offers noticed.  Extraction explores the
transition system directly, emitting only canonical traces (maximal
offers, no adjacent duplicates, no empty offers); the full closed set is
recovered by covering, or materialised by the oracle-mode extractor.
"""
from __future__ import annotations

import itertools

from .errors import SpecError, StateLimitError
from .healthiness import EvalMeta, TraceSet, max_offers
from .kernel import TAU, Bounds, ModelParams
from .process import (
    Call, Div, ExtChoice, Hide, InputPrefix, IntChoice, IntChoiceMany,
    Interleave, Mu, Parallel, Prefix, Rename, Stop, SpecEnv, Timeout, Var,
    subst_events, unfold,
)


class StepEngine:
    """Memoised transition computation over process terms."""

    def __init__(self, env: SpecEnv, tau_budget: int = 100):
        self.env = env
        self.tau_budget = tau_budget
        self._steps: dict = {}
        self._closure: dict = {}

    def steps(self, term):
        """All transitions of a term as (label, successor) pairs, where the
        label is an event name or the internal action."""
        cached = self._steps.get(term)
        if cached is None:
            cached = tuple(self._compute(term))
            self._steps[term] = cached
        return cached

    def _compute(self, term):
        if isinstance(term, Stop):
            return
        elif isinstance(term, Div):
            yield (TAU, term)
        elif isinstance(term, Prefix):
            yield (term.event, term.body)
        elif isinstance(term, InputPrefix):
            for a in sorted(term.events):
                yield (a, subst_events(term.body, {term.binder: a}))
        elif isinstance(term, ExtChoice):
            for lab, succ in self.steps(term.left):
                if lab is TAU:
                    yield (TAU, ExtChoice(succ, term.right))
                else:
                    yield (lab, succ)
            for lab, succ in self.steps(term.right):
                if lab is TAU:
                    yield (TAU, ExtChoice(term.left, succ))
                else:
                    yield (lab, succ)
        elif isinstance(term, IntChoice):
            yield (TAU, term.left)
            yield (TAU, term.right)
        elif isinstance(term, IntChoiceMany):
            for b in term.branches:
                yield (TAU, b)
        elif isinstance(term, Timeout):
            for lab, succ in self.steps(term.left):
                if lab is TAU:
                    yield (TAU, Timeout(succ, term.right))
                else:
                    yield (lab, succ)
            yield (TAU, term.right)
        elif isinstance(term, Parallel):
            la, ra = term.left_events, term.right_events
            sync = la & ra
            rsteps = self.steps(term.right)
            for lab, succ in self.steps(term.left):
                if lab is TAU:
                    yield (TAU, Parallel(succ, la, ra, term.right))
                elif lab in la:
                    if lab in sync:
                        for rlab, rsucc in rsteps:
                            if rlab == lab:
                                yield (lab, Parallel(succ, la, ra, rsucc))
                    else:
                        yield (lab, Parallel(succ, la, ra, term.right))
            for lab, succ in rsteps:
                if lab is TAU:
                    yield (TAU, Parallel(term.left, la, ra, succ))
                elif lab in ra and lab not in sync:
                    yield (lab, Parallel(term.left, la, ra, succ))
        elif isinstance(term, Interleave):
            for lab, succ in self.steps(term.left):
                yield (lab, Interleave(succ, term.right))
            for lab, succ in self.steps(term.right):
                yield (lab, Interleave(term.left, succ))
        elif isinstance(term, Hide):
            for lab, succ in self.steps(term.body):
                if lab is not TAU and lab in term.events:
                    yield (TAU, Hide(succ, term.events))
                else:
                    yield (lab, Hide(succ, term.events))
        elif isinstance(term, Rename):
            for lab, succ in self.steps(term.body):
                if lab is TAU:
                    yield (TAU, Rename(succ, term.pairs))
                else:
                    for frm, to in sorted(term.pairs):
                        if frm == lab:
                            yield (to, Rename(succ, term.pairs))
        elif isinstance(term, Mu):
            yield (TAU, unfold(term))
        elif isinstance(term, Call):
            yield (TAU, self.env.instantiate(term.name, term.args))
        elif isinstance(term, Var):
            raise SpecError(f"unbound process variable {term.name!r}")
        else:
            raise SpecError(f"unknown process construct {type(term).__name__}")

    def initials(self, term):
        return sorted({lab for lab, _ in self.steps(term) if lab is not TAU})

    def tau_closure(self, term):
        """States reachable by internal steps within the budget, plus a
        completeness flag (False when the budget cut exploration short)."""
        cached = self._closure.get(term)
        if cached is None:
            seen = {term}
            frontier = [term]
            complete = True
            for _ in range(self.tau_budget):
                if not frontier:
                    break
                nxt = []
                for t in frontier:
                    for lab, succ in self.steps(t):
                        if lab is TAU and succ not in seen:
                            seen.add(succ)
                            nxt.append(succ)
                frontier = nxt
            if frontier:
                complete = False
            cached = (frozenset(seen), complete)
            self._closure[term] = cached
        return cached


def avail_traces(term, env: SpecEnv, params: ModelParams, bounds: Bounds,
                 len_bound: int | None = None, engine: StepEngine | None = None) -> TraceSet:
    """Canonical availability-trace set extracted from the transition
    system, bounded in length, run length, and offer size."""
    if engine is None:
        engine = StepEngine(env, bounds.tau_budget)
    length = bounds.trace_len if len_bound is None else len_bound
    meta = EvalMeta(engine="operational")
    memo: dict = {}

    def suffixes(state, len_left, run_left, last_offer):
        key = (state, len_left, run_left, last_offer)
        cached = memo.get(key)
        if cached is not None:
            return cached
        out = {()}
        closure, complete = engine.tau_closure(state)
        if not complete:
            meta.tau_budget_hit = True
        for t in closure:
            event_steps = [(lab, succ) for lab, succ in engine.steps(t) if lab is not TAU]
            if event_steps and len_left == 0:
                meta.len_bound_hit = True
            if len_left == 0:
                continue
            for lab, succ in event_steps:
                for suf in suffixes(succ, len_left - 1, params.run_bound, None):
                    out.add((lab,) + suf)
            if run_left is None or run_left > 0:
                nxt_run = None if run_left is None else run_left - 1
                for offer in max_offers(engine.initials(t), params.set_bound):
                    if offer == last_offer:
                        continue
                    for suf in suffixes(t, len_left - 1, nxt_run, offer):
                        out.add((offer,) + suf)
        result = frozenset(out)
        memo[key] = result
        return result

    canon = suffixes(term, length, params.run_bound, None)
    return TraceSet(canon, params, length, meta)


def avail_traces_full(term, env: SpecEnv, params: ModelParams, bounds: Bounds,
                      len_bound: int | None = None) -> frozenset:
    """Oracle-mode extraction: the fully materialised closed set within the
    bounded universe, with every subset offer (including the empty one) and
    no duplicate suppression.  Exponential; for cross-checking only."""
    engine = StepEngine(env, bounds.tau_budget)
    length = bounds.trace_len if len_bound is None else len_bound
    memo: dict = {}

    def all_offers(enabled):
        for size in range(len(enabled) + 1):
            if params.set_bound is not None and size > params.set_bound:
                break
            for c in itertools.combinations(enabled, size):
                yield frozenset(c)

    def suffixes(state, len_left, run_left):
        key = (state, len_left, run_left)
        cached = memo.get(key)
        if cached is not None:
            return cached
        out = {()}
        closure, _ = engine.tau_closure(state)
        for t in closure:
            if len_left == 0:
                continue
            for lab, succ in engine.steps(t):
                if lab is TAU:
                    continue
                for suf in suffixes(succ, len_left - 1, params.run_bound):
                    out.add((lab,) + suf)
            if run_left is None or run_left > 0:
                nxt_run = None if run_left is None else run_left - 1
                for offer in all_offers(engine.initials(t)):
                    for suf in suffixes(t, len_left - 1, nxt_run):
                        out.add((offer,) + suf)
        result = frozenset(out)
        memo[key] = result
        return result

    return suffixes(term, length, params.run_bound)


def std_traces(term, env: SpecEnv, max_len: int, tau_budget: int = 100,
               engine: StepEngine | None = None) -> frozenset:
    """Ordinary event traces up to a length bound (no offers)."""
    if engine is None:
        engine = StepEngine(env, tau_budget)
    memo: dict = {}

    def suffixes(state, len_left):
        key = (state, len_left)
        cached = memo.get(key)
        if cached is not None:
            return cached
        out = {()}
        closure, _ = engine.tau_closure(state)
        if len_left > 0:
            for t in closure:
                for lab, succ in engine.steps(t):
                    if lab is TAU:
                        continue
                    for suf in suffixes(succ, len_left - 1):
                        out.add((lab,) + suf)
        result = frozenset(out)
        memo[key] = result
        return result

    return suffixes(term, max_len)


def stable_failures(term, env: SpecEnv, max_len: int, tau_budget: int = 100) -> dict:
    """Maximal stable refusals per event trace: maps each trace to the
    antichain of refusal sets observed at stable states reached by it."""
    engine = StepEngine(env, tau_budget)
    sigma = frozenset(env.alphabet.events)
    found: dict = {}
    seen = set()

    def visit(state, trace):
        key = (state, trace)
        if key in seen:
            return
        seen.add(key)
        closure, _ = engine.tau_closure(state)
        for t in closure:
            steps = engine.steps(t)
            if all(lab is not TAU for lab, _ in steps):
                refusal = sigma - frozenset(engine.initials(t))
                found.setdefault(trace, set()).add(refusal)
            if len(trace) < max_len:
                for lab, succ in steps:
                    if lab is not TAU:
                        visit(succ, trace + (lab,))

    visit(term, ())
    out = {}
    for trace, refusals in found.items():
        maximal = {r for r in refusals if not any(r < other for other in refusals)}
        out[trace] = frozenset(maximal)
    return out


def build_lts(term, env: SpecEnv, state_cap: int = 4096, engine: StepEngine | None = None):
    """Reachable transition system by breadth-first exploration.

    Returns (states, transitions) with states in discovery order and
    transitions as a list of (source index, label, target index) triples.
    Raises StateLimitError beyond the state cap.
    """
    if engine is None:
        engine = StepEngine(env)
    index = {term: 0}
    states = [term]
    transitions = []
    frontier = [term]
    while frontier:
        nxt = []
        for state in frontier:
            for lab, succ in engine.steps(state):
                j = index.get(succ)
                if j is None:
                    if len(states) >= state_cap:
                        raise StateLimitError(
                            f"transition system exceeds {state_cap} states"
                        )
                    j = len(states)
                    index[succ] = j
                    states.append(succ)
                    nxt.append(succ)
                transitions.append((index[state], lab, j))
        frontier = nxt
    return states, transitions


def is_divergent(term, env: SpecEnv, state_cap: int = 4096) -> bool:
    """Whether any reachable state starts an infinite internal run.  A
    transition system above the state cap is conservatively reported as
    divergent."""
    try:
        states, transitions = build_lts(term, env, state_cap)
    except StateLimitError:
        return True
    tau_succ: dict = {}
    for i, lab, j in transitions:
        if lab is TAU:
            tau_succ.setdefault(i, []).append(j)
    color = {}

    def has_cycle(i):
        color[i] = 1
        for j in tau_succ.get(i, ()):
            c = color.get(j)
            if c == 1:
                return True
            if c is None and has_cycle(j):
                return True
        color[i] = 2
        return False

    return any(color.get(i) is None and has_cycle(i) for i in range(len(states)))
