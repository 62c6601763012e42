"""Equivalence and refinement of processes under chosen model parameters.

Two processes are compared by mutual closure-aware membership of their
canonical trace cores.  A disagreement is reported with a minimal witness
(shortest, then alphabet order) found among the in-universe traces covered
by the disagreeing canonical members; covering is transitive and
down-closed, so every separating trace lies under some disagreeing member
and the enumeration is exhaustive.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import StateLimitError
from .healthiness import TraceSet, cond4_reduce
from .kernel import (
    Alphabet, Bounds, ModelParams, compose, decompose, normalize_trace,
    show_trace,
)
from .operational import avail_traces, build_lts
from .process import SpecEnv

EQUAL = "equal"
EQUAL_WITHIN_BOUNDS = "equal-within-bounds"
DISTINGUISHED = "distinguished"
REFINED = "refined"
REFINED_WITHIN_BOUNDS = "refined-within-bounds"


@dataclass
class CompareResult:
    verdict: str
    params: ModelParams
    witness: tuple | None = None
    witness_side: str | None = None

    def describe(self, alphabet: Alphabet | None = None) -> str:
        head = f"[{self.params.show()}] {self.verdict}"
        if self.witness is None:
            return head
        return f"{head}: {show_trace(self.witness, alphabet)} only in {self.witness_side}"

    def json_obj(self, alphabet: Alphabet | None = None) -> dict:
        obj = {"verdict": self.verdict}
        obj.update(self.params.json_obj())
        if self.witness is not None:
            obj["witness"] = show_trace(self.witness, alphabet)
            obj["witness_side"] = self.witness_side
        return obj


def _trace_sets(p, q, env, params, bounds, engine):
    if engine == "denotational":
        from .denotational import denote_traces

        return denote_traces(p, env, params, bounds), denote_traces(q, env, params, bounds)
    return (
        avail_traces(p, env, params, bounds),
        avail_traces(q, env, params, bounds),
    )


def equal_in(p, q, env: SpecEnv, params: ModelParams, bounds: Bounds,
             engine: str = "operational") -> CompareResult:
    """Do the two processes have the same trace set in this model?"""
    tp, tq = _trace_sets(p, q, env, params, bounds, engine)
    only_p = [tr for tr in tp.canon if not tq._member_normalized(tr)]
    only_q = [tr for tr in tq.canon if not tp._member_normalized(tr)]
    budget_hit = tp.meta.tau_budget_hit or tq.meta.tau_budget_hit
    if not only_p and not only_q:
        return CompareResult(
            EQUAL_WITHIN_BOUNDS if budget_hit else EQUAL, params
        )
    witness, side = _minimal_witness(env.alphabet, tp, tq, only_p, only_q)
    return CompareResult(DISTINGUISHED, params, witness, side)


def refine_in(p, q, env: SpecEnv, params: ModelParams, bounds: Bounds,
              engine: str = "operational") -> CompareResult:
    """Does the second process refine the first: every trace it can show,
    the first can show too?"""
    tp, tq = _trace_sets(p, q, env, params, bounds, engine)
    only_q = [tr for tr in tq.canon if not tp._member_normalized(tr)]
    budget_hit = tp.meta.tau_budget_hit or tq.meta.tau_budget_hit
    if not only_q:
        return CompareResult(
            REFINED_WITHIN_BOUNDS if budget_hit else REFINED, params
        )
    witness, side = _minimal_witness(env.alphabet, tp, tq, [], only_q)
    return CompareResult(DISTINGUISHED, params, witness, side)


def _covered_variants(trace, params: ModelParams, len_bound: int):
    """Every in-universe trace covered by a canonical trace: per run, all
    short-enough monotone re-samplings into nonempty subsets."""
    runs, events = decompose(trace)
    max_run = len_bound if params.run_bound is None else min(params.run_bound, len_bound)
    options = []
    for r in runs:
        subsets = {
            j: [
                frozenset(c)
                for size in range(1, (len(r[j]) if params.set_bound is None
                                      else min(params.set_bound, len(r[j]))) + 1)
                for c in itertools.combinations(sorted(r[j]), size)
            ]
            for j in range(len(r))
        }
        variants = {()}
        for length in range(1, max_run + 1):
            for jmap in itertools.combinations_with_replacement(range(len(r)), length):
                for choice in itertools.product(*[subsets[j] for j in jmap]):
                    variants.add(tuple(choice))
        options.append(variants)
    for combo in itertools.product(*options):
        out = normalize_trace(compose(combo, events))
        if len(out) <= len_bound:
            yield out


def _minimal_witness(alphabet: Alphabet, tp: TraceSet, tq: TraceSet,
                     only_p, only_q):
    best = None
    best_key = None
    best_side = None
    for disagreeing, mine, other, side in (
        (only_p, tp, tq, "left"),
        (only_q, tq, tp, "right"),
    ):
        for c in disagreeing:
            for var in _covered_variants(c, mine.params, mine.len_bound):
                red = cond4_reduce(var)
                if mine._member_normalized(red) and not other._member_normalized(red):
                    key = alphabet.trace_key(var)
                    if best_key is None or key < best_key:
                        best = var
                        best_key = key
                        best_side = side
    return best, best_side


def distinguish(p, q, env: SpecEnv, grid, bounds: Bounds,
                engine: str = "operational") -> list:
    """Compare two processes across a grid of model parameters."""
    return [equal_in(p, q, env, params, bounds, engine) for params in grid]


SIMILAR = "similar"
NOT_SIMILAR = "not-similar"
INDETERMINATE = "indeterminate"


def sim_preorder(p, q, env: SpecEnv, state_cap: int = 4096) -> str:
    """Strong simulation of the first process by the second, internal
    steps treated as ordinary labels.  Indeterminate when either
    transition system exceeds the state cap."""
    try:
        pstates, ptrans = build_lts(p, env, state_cap)
        qstates, qtrans = build_lts(q, env, state_cap)
    except StateLimitError:
        return INDETERMINATE

    def succ_map(trans):
        succ = {}
        for i, lab, j in trans:
            succ.setdefault(i, {}).setdefault(lab, set()).add(j)
        return succ

    psucc = succ_map(ptrans)
    qsucc = succ_map(qtrans)
    related = {
        (i, j) for i in range(len(pstates)) for j in range(len(qstates))
    }
    changed = True
    while changed:
        changed = False
        for (i, j) in list(related):
            ok = True
            for lab, targets in psucc.get(i, {}).items():
                qtargets = qsucc.get(j, {}).get(lab, ())
                for i2 in targets:
                    if not any((i2, j2) in related for j2 in qtargets):
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                related.discard((i, j))
                changed = True
    return SIMILAR if (0, 0) in related else NOT_SIMILAR


def mutually_similar(p, q, env: SpecEnv, state_cap: int = 4096) -> str:
    a = sim_preorder(p, q, env, state_cap)
    b = sim_preorder(q, p, env, state_cap)
    if INDETERMINATE in (a, b):
        return INDETERMINATE
    return SIMILAR if a == b == SIMILAR else NOT_SIMILAR
