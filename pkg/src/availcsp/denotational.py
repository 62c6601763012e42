"""Denotational semantics: compositional trace-set evaluation.

Each operator clause builds the canonical core of the composite trace set
from the cores of its arguments, re-establishing the bounded universe
afterwards.  Recursion is solved by iteration from the least trace set
{⟨⟩}: named definitions through a vector of reachable instantiations,
inline recursion through a nested local fixpoint.  Both converge because
the bounded universe is finite and every clause is monotone.

Hiding consumes performed events, so when a term can reach a hiding
operator the evaluation runs at the longer internal length bound and the
result is trimmed back at the end.
"""
from __future__ import annotations

from .errors import BudgetError, SpecError
from .healthiness import EvalMeta, TraceSet, finalize, max_offers
from .kernel import Bounds, ModelParams
from .process import (
    Call, Div, ExtChoice, Hide, InputPrefix, IntChoice, IntChoiceMany,
    Interleave, Mu, Parallel, Prefix, Rename, Stop, SpecEnv, Timeout, Var,
    subst_events,
)
from .trace_algebra import (
    concat_traces, hide_set, merge_sets, merge_traces, offers_only,
    rename_set, restrict_set, split_first_event,
)

BOTTOM = frozenset({()})

MAX_INSTANTIATIONS = 256
MAX_ROUNDS = 10_000


def state_runs(choices, run_bound: int | None, len_bound: int) -> set:
    """Offer runs observable while sitting at one stable state: sequences
    over the maximal offer choices without adjacent repeats."""
    cap = len_bound if run_bound is None else min(run_bound, len_bound)
    runs = {()}
    frontier = [()]
    for _ in range(cap):
        nxt = []
        for r in frontier:
            for o in choices:
                if r and r[-1] == o:
                    continue
                nxt.append(r + (o,))
        runs.update(nxt)
        frontier = nxt
    return runs


def mentions_hiding(term, env: SpecEnv) -> bool:
    seen = set()

    def walk(t) -> bool:
        if isinstance(t, Hide):
            return True
        if isinstance(t, Call):
            if t.name in seen:
                return False
            seen.add(t.name)
            if walk(env.lookup(t.name).body):
                return True
        return any(walk(c) for c in _subterms(t))

    return walk(term)


def _subterms(t):
    for name in ("body", "left", "right"):
        child = getattr(t, name, None)
        if child is not None and not isinstance(child, (str, frozenset)):
            yield child
    for child in getattr(t, "branches", ()):
        yield child


class DenotationalEngine:
    def __init__(self, env: SpecEnv, params: ModelParams, eval_len: int):
        self.env = env
        self.params = params
        self.eval_len = eval_len
        self.vector: dict = {}

    def _finalize(self, traces) -> frozenset:
        return finalize(traces, self.params, self.eval_len)

    def _canon_equal(self, c1: frozenset, c2: frozenset) -> bool:
        a = TraceSet(c1, self.params, self.eval_len)
        b = TraceSet(c2, self.params, self.eval_len)
        return all(b._member_normalized(t) for t in c1) and all(
            a._member_normalized(t) for t in c2
        )

    def solve(self, term) -> frozenset:
        """Evaluate a closed term, iterating the instantiation vector of
        named definitions to its least fixpoint."""
        for _ in range(MAX_ROUNDS):
            before = dict(self.vector)
            result = self.denote(term, {})
            for key in list(self.vector):
                name, args = key
                body = self.env.instantiate(name, args)
                self.vector[key] = self.denote(body, {})
            if set(before) == set(self.vector) and all(
                self._canon_equal(before[k], self.vector[k]) for k in before
            ):
                return result
        raise BudgetError("recursion failed to stabilise within the round limit")

    def denote(self, term, vmap: dict) -> frozenset:
        if isinstance(term, Stop) or isinstance(term, Div):
            return BOTTOM
        if isinstance(term, Prefix):
            return self._prefix_clause(
                [term.event], {term.event: self.denote(term.body, vmap)}
            )
        if isinstance(term, InputPrefix):
            events = sorted(term.events)
            conts = {
                a: self.denote(subst_events(term.body, {term.binder: a}), vmap)
                for a in events
            }
            return self._prefix_clause(events, conts)
        if isinstance(term, ExtChoice):
            return self._ext_clause(
                self.denote(term.left, vmap), self.denote(term.right, vmap)
            )
        if isinstance(term, IntChoice):
            return self._finalize(
                self.denote(term.left, vmap) | self.denote(term.right, vmap)
            )
        if isinstance(term, IntChoiceMany):
            out = set()
            for b in term.branches:
                out |= self.denote(b, vmap)
            return self._finalize(out)
        if isinstance(term, Timeout):
            left = self.denote(term.left, vmap)
            right = self.denote(term.right, vmap)
            out = set(left)
            for p in offers_only(left):
                for q in right:
                    out.add(concat_traces(p, q))
            return self._finalize(out)
        if isinstance(term, Parallel):
            left = restrict_set(self.denote(term.left, vmap), term.left_events)
            right = restrict_set(self.denote(term.right, vmap), term.right_events)
            sync = term.left_events & term.right_events
            return self._finalize(merge_sets(left, right, sync))
        if isinstance(term, Interleave):
            return self._finalize(
                merge_sets(
                    self.denote(term.left, vmap),
                    self.denote(term.right, vmap),
                    frozenset(),
                )
            )
        if isinstance(term, Hide):
            return self._finalize(hide_set(self.denote(term.body, vmap), term.events))
        if isinstance(term, Rename):
            return self._finalize(rename_set(self.denote(term.body, vmap), term.pairs))
        if isinstance(term, Mu):
            cur = BOTTOM
            for _ in range(MAX_ROUNDS):
                inner = dict(vmap)
                inner[term.var] = cur
                nxt = self.denote(term.body, inner)
                if self._canon_equal(cur, nxt):
                    return cur
                cur = nxt
            raise BudgetError("inline recursion failed to stabilise")
        if isinstance(term, Var):
            val = vmap.get(term.name)
            if val is None:
                raise SpecError(f"unbound process variable {term.name!r}")
            return val
        if isinstance(term, Call):
            key = (term.name, term.args)
            val = self.vector.get(key)
            if val is None:
                if len(self.vector) >= MAX_INSTANTIATIONS:
                    raise BudgetError(
                        f"more than {MAX_INSTANTIATIONS} recursion instantiations"
                    )
                self.vector[key] = BOTTOM
                val = BOTTOM
            return val
        raise SpecError(f"unknown process construct {type(term).__name__}")

    def _prefix_clause(self, events, conts: dict) -> frozenset:
        choices = max_offers(events, self.params.set_bound)
        runs = state_runs(choices, self.params.run_bound, self.eval_len)
        out = set(runs)
        for a, cont in conts.items():
            for run in runs:
                for t in cont:
                    out.add(run + (a,) + t)
        return self._finalize(out)

    def _ext_clause(self, left: frozenset, right: frozenset) -> frozenset:
        """Composite of an external choice: both sides' offers accumulate
        until the first performed event resolves it."""
        lofs = offers_only(left)
        rofs = offers_only(right)
        out = set()
        for p in lofs:
            for q in rofs:
                out.update(merge_traces(p, q, frozenset()))
        for canon, other in ((left, rofs), (right, lofs)):
            for m in canon:
                parts = split_first_event(m)
                if parts is None:
                    continue
                pre, a, suf = parts
                for q in other:
                    for pm in merge_traces(pre, q, frozenset()):
                        out.add(pm + (a,) + suf)
        return self._finalize(out)


def denote_traces(term, env: SpecEnv, params: ModelParams, bounds: Bounds,
                  len_bound: int | None = None) -> TraceSet:
    """Denotational trace set of a term, trimmed to the requested length."""
    length = bounds.trace_len if len_bound is None else len_bound
    eval_len = max(length, bounds.internal_len) if mentions_hiding(term, env) else length
    engine = DenotationalEngine(env, params, eval_len)
    canon = engine.solve(term)
    if eval_len != length:
        canon = finalize(canon, params, length)
    return TraceSet(canon, params, length, EvalMeta(engine="denotational"))
