"""Command-line interface.

Exit codes: 0 when the queried property holds (equal, refined, may pass,
healthy, faithful round trip), 1 when it is refuted with a witness, and 2
for usage errors or verdicts cut short by an exploration budget.
"""
from __future__ import annotations

import argparse
import json
import sys

from .denotational import denote_traces
from .equivalence import (
    DISTINGUISHED, EQUAL, REFINED, distinguish, equal_in, refine_in,
)
from .errors import AvailCspError
from .healthiness import check_healthy, close_healthy, covers_equal
from .kernel import Bounds, ModelParams, parse_trace, show_trace
from .operational import avail_traces, std_traces
from .parser import parse_process, parse_spec
from .process import Call, SpecEnv, pretty
from .simulation import decode_trace, emit_script, to_simulation
from .testing import may_pass, parse_test, realize, show_test, test_from_trace

USAGE_ERROR = 2

ENGINE_NAMES = {"op": "operational", "den": "denotational"}


def _usage(message: str):
    # SystemExit with a string exits with status 1; the contract is 2
    print(f"availcsp: {message}", file=sys.stderr)
    raise SystemExit(USAGE_ERROR)


def _parse_bound(text: str, flag: str) -> int | None:
    if text in ("F", "f"):
        return None
    try:
        value = int(text)
    except ValueError:
        _usage(f"bad {flag} value {text!r} (expected a number or F)")
    if value < 0:
        _usage(f"{flag} must not be negative")
    return value


def parse_model(text: str) -> ModelParams:
    """Parse a --model argument of the form ``n=F,k=1``."""
    parts = dict()
    for piece in text.split(","):
        if "=" not in piece:
            _usage(f"bad --model piece {piece!r}")
        key, _, val = piece.partition("=")
        parts[key.strip()] = val.strip()
    unknown = set(parts) - {"n", "k"}
    if unknown:
        _usage(f"unknown --model keys {sorted(unknown)}")
    return ModelParams(
        run_bound=_parse_bound(parts.get("n", "F"), "n"),
        set_bound=_parse_bound(parts.get("k", "1"), "k"),
    )


def _parse_grid_axis(text: str, flag: str) -> list:
    values = []
    for piece in text.split(","):
        piece = piece.strip()
        if ".." in piece:
            lo, _, hi = piece.partition("..")
            try:
                values.extend(range(int(lo), int(hi) + 1))
            except ValueError:
                _usage(f"bad {flag} range {piece!r}")
        else:
            values.append(_parse_bound(piece, flag))
    return values


def parse_grid(text: str) -> list:
    """Parse a --grid argument of the form ``n=1..3,k=1..2`` (each axis a
    comma list of naturals, F, or lo..hi ranges)."""
    if not text.startswith("n="):
        _usage("--grid must start with n=")
    body = text[2:]
    if ",k=" not in body:
        _usage("--grid needs a k= part")
    n_part, _, k_part = body.partition(",k=")
    return [
        ModelParams(run_bound=n, set_bound=k)
        for n in _parse_grid_axis(n_part, "n")
        for k in _parse_grid_axis(k_part, "k")
    ]


def _load_env(args) -> SpecEnv:
    with open(args.spec, encoding="utf-8") as fh:
        return parse_spec(fh.read())


def _resolve(expr: str, env: SpecEnv):
    """A process term for a CLI argument: a defined name from the spec
    file or an inline expression over its alphabet."""
    name = expr.strip()
    if name in env.definitions and not env.definitions[name].params:
        return Call(name, ())
    return parse_process(expr, env)


def _bounds(args) -> Bounds:
    return Bounds(
        trace_len=args.len,
        tau_budget=args.tau,
        internal_len=args.internal_len,
    )


def _trace_set(term, env, params, bounds, engine: str):
    if ENGINE_NAMES.get(engine, engine) == "denotational":
        return denote_traces(term, env, params, bounds)
    return avail_traces(term, env, params, bounds)


def _read_trace_lines(path: str, alphabet) -> list:
    traces = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("["):
                from .kernel import trace_from_json

                traces.append(trace_from_json(line, alphabet))
            elif line.startswith("{"):
                continue
            else:
                traces.append(parse_trace(line, alphabet))
    return traces


def _add_common(sub, engine: bool = True):
    sub.add_argument("--model", default="n=F,k=1", help="model parameters, e.g. n=F,k=2")
    sub.add_argument("--len", type=int, default=5, help="trace length bound")
    sub.add_argument("--tau", type=int, default=100, help="internal-step budget")
    sub.add_argument(
        "--internal-len", type=int, default=None,
        help="length bound under hiding (default: 3x --len)",
    )
    if engine:
        sub.add_argument(
            "--engine", choices=("op", "den"), default="op",
            help="semantics used to compute trace sets",
        )
    sub.add_argument("--json", action="store_true", help="machine-readable output")


def build_arg_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="availcsp",
        description="Availability-trace semantics for CSP processes.",
    )
    subs = top.add_subparsers(dest="command", required=True)

    s = subs.add_parser("traces", help="dump the trace set of a process")
    s.add_argument("spec", help="spec file declaring the alphabet and definitions")
    s.add_argument("process")
    _add_common(s)

    s = subs.add_parser("equiv", help="compare two processes for equality")
    s.add_argument("spec")
    s.add_argument("left")
    s.add_argument("right")
    _add_common(s)

    s = subs.add_parser("refine", help="check that the second process refines the first")
    s.add_argument("spec")
    s.add_argument("spec_process")
    s.add_argument("impl_process")
    _add_common(s)

    s = subs.add_parser("test", help="run a may test against a process")
    s.add_argument("spec")
    s.add_argument("process")
    s.add_argument("--test", dest="test_literal", help="test literal, e.g. 'a . ready {b} & SUCCESS'")
    s.add_argument("--from-trace", dest="from_trace", help="derive the test from a trace literal")
    _add_common(s, engine=False)

    s = subs.add_parser("health", help="verify the closure conditions")
    s.add_argument("spec")
    s.add_argument("process", nargs="?")
    s.add_argument("--traces-file", help="explicit trace set, one literal or JSON trace per line")
    _add_common(s)

    s = subs.add_parser("realize", help="build a process from a trace set")
    s.add_argument("spec", help="spec file (the alphabet header is enough)")
    s.add_argument("traces_file")
    s.add_argument("--check", action="store_true", help="verify the realization round trip")
    _add_common(s, engine=False)

    s = subs.add_parser("simulate", help="emit the offer-event simulation script")
    s.add_argument("spec")
    s.add_argument("process")
    s.add_argument("--state-cap", type=int, default=4096)
    s.add_argument("--check", action="store_true", help="verify the decoded round trip")
    _add_common(s, engine=False)

    s = subs.add_parser("distinguish", help="compare two processes across a parameter grid")
    s.add_argument("spec")
    s.add_argument("left")
    s.add_argument("right")
    s.add_argument("--grid", default="n=1..3,k=1..2", help="e.g. n=1..3,k=1,2,F")
    _add_common(s)

    s = subs.add_parser("congruence", help="compare the two semantic engines on one process")
    s.add_argument("spec")
    s.add_argument("process")
    _add_common(s, engine=False)
    return top


def _cmd_traces(args) -> int:
    env = _load_env(args)
    term = _resolve(args.process, env)
    ts = _trace_set(term, env, parse_model(args.model), _bounds(args), args.engine)
    if args.json:
        for line in ts.json_lines(env.alphabet):
            print(line)
    else:
        flags = []
        if ts.meta.tau_budget_hit:
            flags.append("tau-budget-hit")
        if ts.meta.len_bound_hit:
            flags.append("length-bound-hit")
        note = (" [" + ", ".join(flags) + "]") if flags else ""
        print(f"# {ts.meta.engine} {parse_model(args.model).show()} len={ts.len_bound} "
              f"count={len(ts)}{note}")
        for tr in ts.members_sorted(env.alphabet):
            print(show_trace(tr, env.alphabet))
    return 0


def _compare(args, kind: str) -> int:
    env = _load_env(args)
    if kind == "equal":
        lterm = _resolve(args.left, env)
        rterm = _resolve(args.right, env)
        result = equal_in(lterm, rterm, env, parse_model(args.model), _bounds(args),
                          ENGINE_NAMES[args.engine])
        good = EQUAL
    else:
        lterm = _resolve(args.spec_process, env)
        rterm = _resolve(args.impl_process, env)
        result = refine_in(lterm, rterm, env, parse_model(args.model), _bounds(args),
                           ENGINE_NAMES[args.engine])
        good = REFINED
    if args.json:
        print(json.dumps(result.json_obj(env.alphabet), sort_keys=True))
    else:
        print(result.describe(env.alphabet))
    if result.verdict == good:
        return 0
    if result.verdict == DISTINGUISHED:
        return 1
    return 2


def _cmd_test(args) -> int:
    env = _load_env(args)
    term = _resolve(args.process, env)
    if bool(args.test_literal) == bool(args.from_trace):
        _usage("give exactly one of --test or --from-trace")
    if args.test_literal:
        test = parse_test(args.test_literal, env.alphabet)
    else:
        test = test_from_trace(parse_trace(args.from_trace, env.alphabet))
    verdict = may_pass(term, test, env, args.tau)
    if args.json:
        print(json.dumps({
            "may": verdict.may,
            "complete": verdict.complete,
            "witness": verdict.witness,
            "test": show_test(test),
        }, sort_keys=True))
    else:
        print(verdict.describe())
    if verdict.may:
        return 0
    return 1 if verdict.complete else 2


def _cmd_health(args) -> int:
    env = _load_env(args)
    params = parse_model(args.model)
    if bool(args.process) == bool(args.traces_file):
        _usage("give exactly one of a process or --traces-file")
    if args.traces_file:
        subject = _read_trace_lines(args.traces_file, env.alphabet)
    else:
        term = _resolve(args.process, env)
        subject = _trace_set(term, env, params, _bounds(args), args.engine)
    report = check_healthy(subject, params, args.len)
    if args.json:
        print(json.dumps(report.json_objs(env.alphabet), sort_keys=True))
    else:
        for cond in report.conditions:
            line = f"{cond.condition}: {'pass' if cond.ok else 'fail'}"
            if not cond.ok and cond.witness is not None:
                line += f"  witness {show_trace(cond.witness, env.alphabet)}"
            print(line)
    return 0 if report.ok else 1


def _cmd_realize(args) -> int:
    env = _load_env(args)
    params = parse_model(args.model)
    bounds = _bounds(args)
    traces = _read_trace_lines(args.traces_file, env.alphabet)
    closed = close_healthy(traces, params, args.len, env.alphabet)
    term = realize(closed.canon)
    print(pretty(term))
    if args.check:
        check_env = SpecEnv(env.alphabet, {})
        back = avail_traces(term, check_env, params, bounds)
        if covers_equal(back, closed):
            print("# round trip: exact")
        else:
            print("# round trip: MISMATCH")
            return 1
    return 0


def _cmd_simulate(args) -> int:
    env = _load_env(args)
    term = _resolve(args.process, env)
    params = parse_model(args.model)
    sim = to_simulation(term, env, params, args.state_cap)
    sys.stdout.write(emit_script(sim))
    if args.check:
        bounds = _bounds(args)
        decoded = {
            decode_trace(tr)
            for tr in std_traces(sim.root_term(), sim.env, args.len, args.tau)
        }
        reference = avail_traces(
            term, env, ModelParams(run_bound=None, set_bound=params.set_bound), bounds
        )
        ok = all(
            reference.member(tr, env.alphabet) for tr in decoded
        ) and all(tr in decoded for tr in reference.canon)
        print(f"# round trip: {'exact' if ok else 'MISMATCH'}")
        return 0 if ok else 1
    return 0


def _cmd_distinguish(args) -> int:
    env = _load_env(args)
    lterm = _resolve(args.left, env)
    rterm = _resolve(args.right, env)
    grid = parse_grid(args.grid)
    rows = distinguish(lterm, rterm, env, grid, _bounds(args),
                       ENGINE_NAMES[args.engine])
    if args.json:
        print(json.dumps([r.json_obj(env.alphabet) for r in rows], sort_keys=True))
    else:
        for r in rows:
            print(r.describe(env.alphabet))
    return 0 if all(r.verdict != DISTINGUISHED for r in rows) else 1


def _cmd_congruence(args) -> int:
    env = _load_env(args)
    term = _resolve(args.process, env)
    params = parse_model(args.model)
    bounds = _bounds(args)
    op = avail_traces(term, env, params, bounds)
    den = denote_traces(term, env, params, bounds)
    agree = covers_equal(op, den)
    if args.json:
        print(json.dumps({
            "agree": agree,
            "operational_count": len(op),
            "denotational_count": len(den),
            "tau_budget_hit": op.meta.tau_budget_hit,
        }, sort_keys=True))
    else:
        note = " [tau-budget-hit]" if op.meta.tau_budget_hit else ""
        print(f"engines {'agree' if agree else 'DISAGREE'} at {params.show()} "
              f"len={args.len}{note}")
    if not agree:
        return 1
    return 2 if op.meta.tau_budget_hit else 0


def main(argv=None) -> int:
    args = build_arg_parser().parse_args(argv)
    handlers = {
        "traces": _cmd_traces,
        "equiv": lambda a: _compare(a, "equal"),
        "refine": lambda a: _compare(a, "refine"),
        "test": _cmd_test,
        "health": _cmd_health,
        "realize": _cmd_realize,
        "simulate": _cmd_simulate,
        "distinguish": _cmd_distinguish,
        "congruence": _cmd_congruence,
    }
    try:
        return handlers[args.command](args)
    except AvailCspError as exc:
        print(f"availcsp: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except OSError as exc:
        print(f"availcsp: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
