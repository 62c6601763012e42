"""Trace-level operators used by the denotational semantics.

All functions work on canonical traces (see healthiness).  Outputs may
temporarily leave the canonical universe (oversized offers from merging,
joined runs from concatenation, shortened traces from hiding); callers
re-establish the universe with ``finalize``.
"""
from __future__ import annotations

import itertools

from .kernel import ModelParams, in_obs, is_event, is_offer, normalize_trace


def project_trace(trace, events: frozenset):
    """Projection onto an event set: the subsequence of performed events
    that fall in the set.  Offers never survive projection, so projecting
    onto the whole alphabet strips a trace down to its standard part."""
    return tuple(a for a in trace if is_event(a) and a in events)


def respects_params(trace, params: ModelParams) -> bool:
    """Does the trace stay within the model's run and offer-size bounds?"""
    if params.set_bound is not None:
        if any(is_offer(a) and len(a) > params.set_bound for a in trace):
            return False
    return in_obs(trace, params.run_bound)


def interleave_merge(t1, t2) -> frozenset:
    """All shuffles of two traces, each preserving its input's order.
    Positions are taken verbatim from one side or the other; offers are
    never fused (the synchronised merge handles that)."""
    out = set()

    def rec(i, j, acc):
        if i == len(t1) and j == len(t2):
            out.add(tuple(acc))
            return
        if i < len(t1):
            acc.append(t1[i])
            rec(i + 1, j, acc)
            acc.pop()
        if j < len(t2):
            acc.append(t2[j])
            rec(i, j + 1, acc)
            acc.pop()

    rec(0, 0, [])
    return frozenset(out)


def merge_offer(o1: frozenset, o2: frozenset, sync: frozenset) -> frozenset:
    """Joint offer of two components synchronising on ``sync``: an event is
    jointly offered when both sides offer it (if synchronised) or either
    side offers it (if free)."""
    return (o1 & o2 & sync) | (o1 - sync) | (o2 - sync)


def merge_traces(t1, t2, sync: frozenset) -> frozenset:
    """All complete synchronised merges of two canonical traces.

    An observation point of the composite samples one position in each
    component, moving monotonically through both; the same component offer
    may be sampled repeatedly, sampled once, or skipped.  Synchronised
    events must pair up exactly; free events interleave.  Results are
    normalised but may exceed run, offer-size, or length bounds.
    """
    len1, len2 = len(t1), len(t2)
    memo: dict = {}

    def rec(i, j):
        key = (i, j)
        cached = memo.get(key)
        if cached is not None:
            return cached
        out = set()
        if i == len1 and j == len2:
            out.add(())
        a1 = t1[i] if i < len1 else None
        a2 = t2[j] if j < len2 else None
        if a1 is not None and is_event(a1):
            if a1 not in sync:
                out.update((a1,) + suf for suf in rec(i + 1, j))
            elif a2 is not None and a2 == a1:
                out.update((a1,) + suf for suf in rec(i + 1, j + 1))
        if a2 is not None and is_event(a2):
            if a2 not in sync:
                out.update((a2,) + suf for suf in rec(i, j + 1))
        if a1 is not None and is_offer(a1):
            out.update(rec(i + 1, j))
            alone = a1 - sync
            if alone:
                out.update((alone,) + suf for suf in rec(i + 1, j))
        if a2 is not None and is_offer(a2):
            out.update(rec(i, j + 1))
            alone = a2 - sync
            if alone:
                out.update((alone,) + suf for suf in rec(i, j + 1))
        if a1 is not None and is_offer(a1) and a2 is not None and is_offer(a2):
            joint = merge_offer(a1, a2, sync)
            if joint:
                conts = rec(i + 1, j) | rec(i, j + 1) | rec(i + 1, j + 1)
                out.update((joint,) + suf for suf in conts)
        result = frozenset(out)
        memo[key] = result
        return result

    return frozenset(normalize_trace(tr) for tr in rec(0, 0))


def sync_merge(t1, t2, sync: frozenset, params: ModelParams) -> frozenset:
    """Synchronised merge restricted to the model: merges whose offers
    outgrow the set bound or whose runs outgrow the run bound are dropped
    rather than capped (capping belongs to set-level finalisation)."""
    return frozenset(
        tr for tr in merge_traces(t1, t2, sync) if respects_params(tr, params)
    )


def merge_sets(canon1, canon2, sync: frozenset) -> set:
    """Union of all pairwise merges of two canonical cores."""
    out = set()
    for t1 in canon1:
        for t2 in canon2:
            out.update(merge_traces(t1, t2, sync))
    return out


def restrict_trace(trace, allowed: frozenset):
    """Restriction to an event set: drops the trace when it performs an
    event outside the set, and narrows its offers into the set."""
    out = []
    for a in trace:
        if is_event(a):
            if a not in allowed:
                return None
            out.append(a)
        else:
            out.append(a & allowed)
    return normalize_trace(tuple(out))


def restrict_set(canon, allowed: frozenset) -> set:
    out = set()
    for tr in canon:
        r = restrict_trace(tr, allowed)
        if r is not None:
            out.add(r)
    return out


def hide_trace(trace, hidden: frozenset):
    """Hiding: performed hidden events disappear and offers lose their
    hidden part.  Runs separated only by hidden events join up; the caller
    re-clips them."""
    out = []
    for a in trace:
        if is_event(a):
            if a not in hidden:
                out.append(a)
        else:
            out.append(a - hidden)
    return normalize_trace(tuple(out))


def hide_set(canon, hidden: frozenset) -> set:
    return {hide_trace(tr, hidden) for tr in canon}


def hide_trace_set(ts, hidden: frozenset):
    """Hiding lifted to a whole trace set, with the universe (run clips,
    length bound) re-established afterwards."""
    from .healthiness import finalize, from_raw

    raw = finalize(hide_set(ts.canon, hidden), ts.params, ts.len_bound)
    return from_raw(raw, ts.params, ts.len_bound, ts.meta)


def rename_trace(trace, pairs, params: ModelParams | None = None) -> set:
    """Relational renaming: each performed event branches over its images
    (a trace with an imageless event is lost) and each offer becomes the
    image of its members (possibly empty, then dropped by normalisation).

    Without params the offer image is kept whole, which is the canonical
    (maximal) representative; with params the image additionally branches
    over its subsets within the offer-size bound, materialising the
    subset closure the sets model ascribes to renamed offers.
    """
    images: dict = {}
    for frm, to in pairs:
        images.setdefault(frm, set()).add(to)
    results = {()}
    for a in trace:
        if is_event(a):
            targets = images.get(a)
            if not targets:
                return set()
            results = {base + (b,) for base in results for b in sorted(targets)}
        else:
            img = frozenset(b for x in a for b in images.get(x, ()))
            if params is None:
                choices = [img]
            else:
                cap = len(img) if params.set_bound is None else min(params.set_bound, len(img))
                choices = [
                    frozenset(c)
                    for size in range(cap + 1)
                    for c in itertools.combinations(sorted(img), size)
                ]
            results = {base + (o,) for base in results for o in choices}
    out = {normalize_trace(tr) for tr in results}
    if params is not None:
        out = {tr for tr in out if respects_params(tr, params)}
    return out


def rename_set(canon, pairs) -> set:
    out = set()
    for tr in canon:
        out.update(rename_trace(tr, pairs))
    return out


def concat_traces(t1, t2):
    """Concatenation with normalisation at the junction (adjacent runs
    join; the caller re-clips run lengths)."""
    return normalize_trace(t1 + t2)


def offers_only(canon) -> list:
    """Members consisting purely of offers (the empty trace included)."""
    return [tr for tr in canon if all(is_offer(a) for a in tr)]


def split_first_event(trace):
    """Split a canonical trace at its first event into (leading offers,
    event, remainder); None when the trace has no event."""
    for i, a in enumerate(trace):
        if is_event(a):
            return trace[:i], a, trace[i + 1:]
    return None
