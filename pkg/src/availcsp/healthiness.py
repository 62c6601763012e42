"""Canonical trace sets, closure-aware membership, and healthiness checking.

A closed availability-trace set is represented by a finite canonical core:
normalised traces (no empty offers, no adjacent duplicate offers) holding
maximal offered sets.  Everything the closure properties imply is recovered
at query time instead of being stored:

* offer removal and duplication, subset closure, and empty-offer insertion
  are absorbed by a covering check: a query trace is a member when its
  events match a stored trace exactly and each of its offer runs embeds
  order-preservingly into the stored run, pointwise by subset;
* the insertability of a singleton offer directly before its own event is
  absorbed by deleting such offers from the query before covering.

The canonical core itself is kept explicitly closed under prefixes and
under replacing a final offer by one of its events, because those rules
change the event skeleton that covering keys on.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import OutOfUniverseError
from .kernel import (
    Alphabet, ModelParams, check_universe, compose, decompose, in_obs,
    is_event, is_offer, normalize_trace, show_trace, trace_to_json,
)


class EvalMeta:
    """Budget flags accumulated while computing a trace set."""

    def __init__(self, engine: str = ""):
        self.engine = engine
        self.tau_budget_hit = False
        self.len_bound_hit = False
        self.state_cap_hit = False

    def absorb(self, other: "EvalMeta") -> "EvalMeta":
        self.tau_budget_hit |= other.tau_budget_hit
        self.len_bound_hit |= other.len_bound_hit
        self.state_cap_hit |= other.state_cap_hit
        return self

    def json_obj(self) -> dict:
        return {
            "engine": self.engine,
            "tau_budget_hit": self.tau_budget_hit,
            "len_bound_hit": self.len_bound_hit,
        }


def cond4_reduce(trace):
    """Delete singleton offers that immediately precede their own event.

    Such offers are freely insertable in every model, so deleting them
    from a query preserves membership in any closed set.
    """
    while True:
        out = []
        changed = False
        for i, a in enumerate(trace):
            if (
                is_offer(a)
                and len(a) == 1
                and i + 1 < len(trace)
                and is_event(trace[i + 1])
                and trace[i + 1] in a
            ):
                changed = True
                continue
            out.append(a)
        trace = normalize_trace(tuple(out))
        if not changed:
            return trace


def _run_covered(qrun, crun) -> bool:
    j = 0
    for b in qrun:
        while j < len(crun) and not b <= crun[j]:
            j += 1
        if j == len(crun):
            return False
    return True


def covered(query, candidate) -> bool:
    """Is the normalised query derivable from the candidate by offer
    removal/duplication, subset closure, and empty-offer insertion?"""
    qruns, qevents = decompose(query)
    cruns, cevents = decompose(candidate)
    if qevents != cevents:
        return False
    return all(_run_covered(q, c) for q, c in zip(qruns, cruns))


def saturate(traces, run_bound: int | None = None, len_bound: int | None = None):
    """Close a set of normalised traces under the skeleton-changing rules:
    every prefix is a member; a final offer may instead perform one of its
    events; an event may be cut off after the offer of itself (the prefix
    of an offer insertion, licensed only while the inserted form stays
    inside the run and length bounds); and any offer may be dropped.
    Dropping matters because it shortens the trace, which can put a
    length-guarded insertion back in reach."""
    seen = set(traces)
    seen.add(())
    work = list(seen)
    while work:
        tr = work.pop()
        if not tr:
            continue
        for cons in _skeleton_consequences(tr, run_bound, len_bound):
            if cons not in seen:
                seen.add(cons)
                work.append(cons)
    return frozenset(seen)


def _skeleton_consequences(tr, run_bound, len_bound):
    yield tr[:-1]
    last = tr[-1]
    if is_offer(last):
        for a in last:
            yield tr[:-1] + (a,)
        if _may_duplicate_last(tr, run_bound, len_bound):
            for a in last:
                yield tr + (a,)
    for i, a in enumerate(tr):
        if is_offer(a):
            yield normalize_trace(tr[:i] + tr[i + 1:])
            continue
        if len_bound is not None and i + 2 > len_bound:
            continue
        cut = normalize_trace(tr[:i] + (frozenset([a]),))
        if in_obs(cut, run_bound):
            yield cut


def _may_duplicate_last(tr, run_bound, len_bound):
    """Duplicating the final offer must keep the trace inside both
    bounds; the duplicate extends the final offer run by one."""
    if len_bound is not None and len(tr) + 1 > len_bound:
        return False
    if run_bound is None:
        return True
    run = 0
    for action in reversed(tr):
        if is_event(action):
            break
        run += 1
    return run + 1 <= run_bound


class TraceSet:
    """A closed trace set under given model parameters and length bound."""

    def __init__(self, canon, params: ModelParams, len_bound: int, meta: EvalMeta | None = None):
        self.canon = frozenset(canon)
        self.params = params
        self.len_bound = len_bound
        self.meta = meta if meta is not None else EvalMeta()
        self._index = None

    def __len__(self) -> int:
        return len(self.canon)

    def __iter__(self):
        return iter(self.canon)

    def _skeleton_index(self):
        if self._index is None:
            idx = {}
            for tr in self.canon:
                _, events = decompose(tr)
                idx.setdefault(events, []).append(tr)
            self._index = idx
        return self._index

    def member(self, trace, alphabet: Alphabet | None = None) -> bool:
        """Closure-aware membership.  Raises OutOfUniverseError for queries
        outside the bounded universe rather than answering False."""
        check_universe(trace, self.params, self.len_bound, alphabet)
        return self._member_normalized(cond4_reduce(normalize_trace(trace)))

    def _member_normalized(self, reduced) -> bool:
        if reduced in self.canon:
            return True
        reduced = cond4_reduce(reduced)
        if reduced in self.canon:
            return True
        _, events = decompose(reduced)
        for cand in self._skeleton_index().get(events, ()):
            if covered(reduced, cand):
                return True
        return False

    def members_sorted(self, alphabet: Alphabet):
        return sorted(self.canon, key=alphabet.trace_key)

    def json_lines(self, alphabet: Alphabet):
        head = {
            "count": len(self.canon),
            "len_bound": self.len_bound,
            "params": self.params.json_obj(),
        }
        head.update(self.meta.json_obj())
        import json as _json

        lines = [_json.dumps(head, sort_keys=True)]
        lines.extend(trace_to_json(tr) for tr in self.members_sorted(alphabet))
        return lines


def from_raw(traces, params: ModelParams, len_bound: int, meta: EvalMeta | None = None) -> TraceSet:
    """Build a TraceSet from traces that are already saturation-complete."""
    return TraceSet(frozenset(traces), params, len_bound, meta)


def close_healthy(raw, params: ModelParams, len_bound: int, alphabet: Alphabet | None = None) -> TraceSet:
    """Least closed superset of ``raw`` within the bounded universe."""
    normalized = set()
    for tr in raw:
        check_universe(tr, params, len_bound, alphabet)
        normalized.add(cond4_reduce(normalize_trace(tr)))
    return TraceSet(saturate(normalized, params.run_bound, len_bound), params, len_bound)


def covers_equal(a: TraceSet, b: TraceSet) -> bool:
    if a.params != b.params or a.len_bound != b.len_bound:
        raise ValueError("trace sets compared at different parameters")
    return all(b._member_normalized(tr) for tr in a.canon) and all(
        a._member_normalized(tr) for tr in b.canon
    )


def covers_subset(a: TraceSet, b: TraceSet) -> bool:
    """Does every member of ``a`` belong to ``b``?"""
    if a.params != b.params or a.len_bound != b.len_bound:
        raise ValueError("trace sets compared at different parameters")
    return all(b._member_normalized(tr) for tr in a.canon)


# --- trimming into a bounded universe --------------------------------------


def trim_runs(trace, run_bound: int | None):
    """Canonical variants of a trace with every offer run clipped to the
    run bound (each clipped run keeps every possible position selection)."""
    if run_bound is None or in_obs(trace, run_bound):
        return {trace}
    runs, events = decompose(trace)
    options = []
    for r in runs:
        if len(r) <= run_bound:
            options.append([r])
        else:
            options.append(sorted(set(itertools.combinations(r, run_bound)), key=len))
    out = set()
    for combo in itertools.product(*options):
        out.add(normalize_trace(compose(combo, events)))
    return out


def trim_length(traces, len_bound: int):
    """Canonical cover of the restriction of a set to traces of bounded
    length.  Overlong traces are replaced by every maximal way of keeping a
    prefix of their events and a selection of their offers."""
    out = set()
    for tr in traces:
        if len(tr) <= len_bound:
            out.add(tr)
            continue
        runs, events = decompose(tr)
        max_events = min(len(events), len_bound)
        for w in range(max_events + 1):
            budget = len_bound - w
            kept_runs = runs[: w + 1]
            positions = [(i, j) for i, r in enumerate(kept_runs) for j in range(len(r))]
            if len(positions) <= budget:
                out.add(normalize_trace(compose(kept_runs, events[:w])))
                continue
            for chosen in itertools.combinations(positions, budget):
                new_runs = [[] for _ in kept_runs]
                for i, j in chosen:
                    new_runs[i].append(kept_runs[i][j])
                out.add(normalize_trace(compose([tuple(r) for r in new_runs], events[:w])))
    return out


def max_offers(events, set_bound: int | None):
    """Maximal nonempty offers over an enabled-event collection: the whole
    collection when it fits the set bound, otherwise every bound-sized
    subset.  Smaller offers are recovered by covering at query time."""
    events = sorted(events)
    if not events:
        return []
    if set_bound is None or len(events) <= set_bound:
        return [frozenset(events)]
    return [frozenset(c) for c in itertools.combinations(events, set_bound)]


def _monotone_maps(length: int, targets: int):
    return itertools.combinations_with_replacement(range(targets), length)

def _run_expansions(run, set_bound: int, max_run: int):
    """Replacement runs for a run holding offers above the set bound.

    A member of the restricted universe may map several of its capped
    offers onto one oversized offer (duplication plus subset closure), so
    each replacement is a whole run of capped subsets drawn, order
    preservingly, from the original positions.  The empty run is included
    so the surrounding trace survives even when no offer is expressible.
    """
    caps = []
    for o in run:
        if len(o) <= set_bound:
            caps.append([o])
        else:
            caps.append([frozenset(c) for c in itertools.combinations(sorted(o), set_bound)])
    out = {()}
    for length in range(1, max_run + 1):
        for jmap in _monotone_maps(length, len(run)):
            for choice in itertools.product(*[caps[j] for j in jmap]):
                seq = []
                for b in choice:
                    if not seq or seq[-1] != b:
                        seq.append(b)
                out.add(tuple(seq))
    return out


def cap_offers(trace, params: ModelParams, len_bound: int):
    """Canonical variants of a trace with every offer capped at the set
    bound, expanding oversized offers into runs of capped subsets."""
    k = params.set_bound
    if k is None or all(not is_offer(a) or len(a) <= k for a in trace):
        return {trace}
    max_run = len_bound if params.run_bound is None else min(params.run_bound, len_bound)
    runs, events = decompose(trace)
    options = []
    for r in runs:
        if all(len(o) <= k for o in r):
            options.append([r])
        else:
            options.append(sorted(_run_expansions(r, k, max_run), key=lambda s: (len(s), repr(s))))
    return {
        normalize_trace(compose(combo, events))
        for combo in itertools.product(*options)
    }


def finalize(traces, params: ModelParams, len_bound: int):
    """Normalise, cap offers, clip runs, and bound length; the result is a
    saturated canonical core provided the input was one."""
    step1 = set()
    for tr in traces:
        step1.update(cap_offers(normalize_trace(tr), params, len_bound))
    step2 = set()
    for tr in step1:
        step2.update(trim_runs(tr, params.run_bound))
    return frozenset(trim_length(step2, len_bound))


def restrict_params(ts: TraceSet, params: ModelParams, len_bound: int | None = None) -> TraceSet:
    """Project a trace set into a smaller universe (tighter run bound, set
    bound, or length bound)."""
    lb = ts.len_bound if len_bound is None else min(len_bound, ts.len_bound)
    canon = finalize(ts.canon, params, lb)
    return TraceSet(canon, params, lb, ts.meta)


# --- universe enumeration (oracle-scale only) ------------------------------


def enumerate_universe(alphabet: Alphabet, params: ModelParams, len_bound: int, cap: int = 2_000_000):
    """Every trace in the bounded universe, including empty offers.  Only
    intended for small alphabets and short bounds."""
    events = list(alphabet.events)
    max_size = len(events) if params.set_bound is None else min(params.set_bound, len(events))
    offers = [
        frozenset(c)
        for size in range(0, max_size + 1)
        for c in itertools.combinations(events, size)
    ]
    count = 0

    def rec(prefix, run):
        nonlocal count
        count += 1
        if count > cap:
            raise OutOfUniverseError("universe enumeration exceeded its cap")
        yield tuple(prefix)
        if len(prefix) == len_bound:
            return
        for e in events:
            prefix.append(e)
            yield from rec(prefix, 0)
            prefix.pop()
        if params.run_bound is None or run < params.run_bound:
            for o in offers:
                prefix.append(o)
                yield from rec(prefix, run + 1)
                prefix.pop()

    yield from rec([], 0)


def expand_cover(ts: TraceSet, alphabet: Alphabet, cap: int = 2_000_000):
    """Materialise the full closed set within the bounded universe."""
    return frozenset(
        tr
        for tr in enumerate_universe(alphabet, ts.params, ts.len_bound, cap)
        if ts._member_normalized(cond4_reduce(normalize_trace(tr)))
    )


# --- healthiness verification ----------------------------------------------


@dataclass
class ConditionReport:
    condition: str
    ok: bool
    witness: tuple | None = None

    def json_obj(self, alphabet: Alphabet | None = None) -> dict:
        obj = {"condition": self.condition, "verdict": "pass" if self.ok else "fail"}
        if not self.ok and self.witness is not None:
            obj["witness"] = show_trace(self.witness, alphabet)
        return obj


@dataclass
class HealthReport:
    conditions: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.conditions)

    def failures(self):
        return [c for c in self.conditions if not c.ok]

    def json_objs(self, alphabet: Alphabet | None = None):
        return [c.json_obj(alphabet) for c in self.conditions]


def condition_names(params: ModelParams):
    names = ["nonempty-prefix-closed", "offer-remove-duplicate",
             "offer-implies-event", "event-implies-offer"]
    if params.set_bound != 1:
        names += ["offer-subset-closed", "empty-offer-free"]
    return names


def check_healthy(subject, params: ModelParams, len_bound: int) -> HealthReport:
    """Verify the healthiness conditions.

    ``subject`` may be a TraceSet (membership is closure-aware, so the
    conditions absorbed by the representation hold by construction and the
    substantive checks are prefix closure and offer-implies-event) or a
    plain collection of traces checked literally as an explicit set.
    """
    if isinstance(subject, TraceSet):
        members = sorted(subject.canon, key=lambda t: (len(t), repr(t)))
        contains = lambda tr: len(tr) <= len_bound and subject._member_normalized(
            cond4_reduce(normalize_trace(tr))
        )
    else:
        explicit = frozenset(tuple(t) for t in subject)
        members = sorted(explicit, key=lambda t: (len(t), repr(t)))
        contains = lambda tr: tr in explicit

    def within(tr) -> bool:
        return len(tr) <= len_bound and in_obs(tr, params.run_bound)

    report = HealthReport()

    witness = None
    ok = bool(members) and contains(())
    if ok:
        for tr in members:
            for i in range(len(tr)):
                if not contains(tr[:i]):
                    ok, witness = False, tr
                    break
            if not ok:
                break
    elif members:
        witness = ()
    report.conditions.append(ConditionReport("nonempty-prefix-closed", ok, witness))

    ok, witness = True, None
    for tr in members:
        for i, a in enumerate(tr):
            if not is_offer(a):
                continue
            if not contains(tr[:i] + tr[i + 1:]):
                ok, witness = False, tr
                break
            dup = tr[:i] + (a,) + tr[i:]
            if within(dup) and not contains(dup):
                ok, witness = False, tr
                break
        if not ok:
            break
    report.conditions.append(ConditionReport("offer-remove-duplicate", ok, witness))

    ok, witness = True, None
    for tr in members:
        if tr and is_offer(tr[-1]):
            for a in tr[-1]:
                if not contains(tr[:-1] + (a,)):
                    ok, witness = False, tr
                    break
        if not ok:
            break
    report.conditions.append(ConditionReport("offer-implies-event", ok, witness))

    ok, witness = True, None
    for tr in members:
        for i, a in enumerate(tr):
            if is_event(a):
                ins = tr[:i] + (frozenset([a]),) + tr[i:]
                if within(ins) and not contains(ins):
                    ok, witness = False, tr
                    break
        if not ok:
            break
    report.conditions.append(ConditionReport("event-implies-offer", ok, witness))

    if params.set_bound != 1:
        ok, witness = True, None
        for tr in members:
            for i, a in enumerate(tr):
                if not is_offer(a) or not a:
                    continue
                for sub in _proper_subsets(a):
                    if not contains(tr[:i] + (sub,) + tr[i + 1:]):
                        ok, witness = False, tr
                        break
                if not ok:
                    break
            if not ok:
                break
        report.conditions.append(ConditionReport("offer-subset-closed", ok, witness))

        ok, witness = True, None
        empty = frozenset()
        for tr in members:
            for i in range(len(tr) + 1):
                ins = tr[:i] + (empty,) + tr[i:]
                if within(ins) and not contains(ins):
                    ok, witness = False, tr
                    break
            if not ok:
                break
        report.conditions.append(ConditionReport("empty-offer-free", ok, witness))

    return report


def _proper_subsets(s):
    items = sorted(s)
    for size in range(len(items)):
        for c in itertools.combinations(items, size):
            yield frozenset(c)
