"""Process terms, environments, substitution, and pretty-printing.

Terms are immutable dataclasses compared structurally; the operational
engine uses them directly as states.  Two kinds of name occur inside terms:

* process variables, bound by ``Mu`` or referring to spec definitions
  (``Var`` / ``Call``),
* event variables, bound by ``InputPrefix`` binders or definition
  parameters, standing in any position where an event name may appear.

Event variables are instantiated by textual substitution before a term is
ever executed, so the semantic engines only see concrete event names.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import SpecError
from .kernel import Alphabet


@dataclass(frozen=True)
class Stop:
    pass


@dataclass(frozen=True)
class Div:
    pass


@dataclass(frozen=True)
class Prefix:
    event: str
    body: "Process"


@dataclass(frozen=True)
class InputPrefix:
    """``? x : {a,b} -> body`` offers the whole event set from one state and
    binds the chosen event to ``x`` inside the body.  An empty event set is
    allowed and deadlocks."""

    binder: str
    events: frozenset
    body: "Process"


@dataclass(frozen=True)
class ExtChoice:
    left: "Process"
    right: "Process"


@dataclass(frozen=True)
class IntChoice:
    left: "Process"
    right: "Process"


@dataclass(frozen=True)
class IntChoiceMany:
    """Indexed internal choice, already instantiated to a branch list."""

    branches: tuple

    def __post_init__(self):
        if not self.branches:
            raise ValueError("indexed internal choice needs at least one branch")


@dataclass(frozen=True)
class Timeout:
    left: "Process"
    right: "Process"


@dataclass(frozen=True)
class Parallel:
    left: "Process"
    left_events: frozenset
    right_events: frozenset
    right: "Process"


@dataclass(frozen=True)
class Interleave:
    left: "Process"
    right: "Process"


@dataclass(frozen=True)
class Hide:
    body: "Process"
    events: frozenset


@dataclass(frozen=True)
class Rename:
    """Relational renaming: the process performs b whenever the body performs
    a with (a, b) in the relation.  Events without an image are blocked; list
    identity pairs explicitly to pass events through."""

    body: "Process"
    pairs: frozenset  # of (from_event, to_event)


@dataclass(frozen=True)
class Mu:
    var: str
    body: "Process"


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple = ()


Process = (
    Stop | Div | Prefix | InputPrefix | ExtChoice | IntChoice | IntChoiceMany
    | Timeout | Parallel | Interleave | Hide | Rename | Mu | Var | Call
)


@dataclass(frozen=True)
class Definition:
    params: tuple
    body: "Process"


@dataclass
class SpecEnv:
    """A parsed spec: an alphabet plus named (possibly parameterised,
    possibly mutually recursive) definitions."""

    alphabet: Alphabet
    definitions: dict = field(default_factory=dict)

    def lookup(self, name: str) -> Definition:
        try:
            return self.definitions[name]
        except KeyError:
            raise SpecError(f"undefined process name: {name}") from None

    def instantiate(self, name: str, args=()) -> "Process":
        d = self.lookup(name)
        if len(args) != len(d.params):
            raise SpecError(
                f"{name} takes {len(d.params)} argument(s), got {len(args)}"
            )
        if not d.params:
            return d.body
        return subst_events(d.body, dict(zip(d.params, args)))


def _rebuild(p, **changes):
    kwargs = {f: getattr(p, f) for f in p.__dataclass_fields__}
    kwargs.update(changes)
    return type(p)(**kwargs)


def _children(p):
    if isinstance(p, (Prefix, InputPrefix, Mu)):
        return (("body", p.body),)
    if isinstance(p, (ExtChoice, IntChoice, Timeout, Parallel, Interleave)):
        return (("left", p.left), ("right", p.right))
    if isinstance(p, IntChoiceMany):
        return tuple((i, b) for i, b in enumerate(p.branches))
    if isinstance(p, (Hide, Rename)):
        return (("body", p.body),)
    return ()


def free_process_vars(p) -> frozenset:
    if isinstance(p, Var):
        return frozenset([p.name])
    if isinstance(p, Mu):
        return free_process_vars(p.body) - {p.var}
    out = frozenset()
    for _, c in _children(p):
        out |= free_process_vars(c)
    return out


_fresh_counter = [0]


def _fresh(base: str, avoid) -> str:
    while True:
        _fresh_counter[0] += 1
        cand = f"{base}_{_fresh_counter[0]}"
        if cand not in avoid:
            return cand


def substitute(p, var: str, repl) -> "Process":
    """Capture-avoiding substitution of a process term for a process variable."""
    if isinstance(p, Var):
        return repl if p.name == var else p
    if isinstance(p, Mu):
        if p.var == var:
            return p
        if p.var in free_process_vars(repl):
            fresh = _fresh(p.var, free_process_vars(repl) | free_process_vars(p.body) | {var})
            body = substitute(p.body, p.var, Var(fresh))
            return Mu(fresh, substitute(body, var, repl))
        return Mu(p.var, substitute(p.body, var, repl))
    if isinstance(p, IntChoiceMany):
        return IntChoiceMany(tuple(substitute(b, var, repl) for b in p.branches))
    changes = {name: substitute(c, var, repl) for name, c in _children(p) if not isinstance(name, int)}
    if changes:
        return _rebuild(p, **changes)
    return p


def unfold(p: Mu) -> "Process":
    return substitute(p.body, p.var, p)


def _subst_ev(name: str, mapping: dict) -> str:
    return mapping.get(name, name)


def subst_events(p, mapping: dict) -> "Process":
    """Replace event variables by concrete events everywhere events appear."""
    if not mapping:
        return p
    if isinstance(p, Prefix):
        return Prefix(_subst_ev(p.event, mapping), subst_events(p.body, mapping))
    if isinstance(p, InputPrefix):
        events = frozenset(_subst_ev(e, mapping) for e in p.events)
        inner = {k: v for k, v in mapping.items() if k != p.binder}
        return InputPrefix(p.binder, events, subst_events(p.body, inner))
    if isinstance(p, Parallel):
        return Parallel(
            subst_events(p.left, mapping),
            frozenset(_subst_ev(e, mapping) for e in p.left_events),
            frozenset(_subst_ev(e, mapping) for e in p.right_events),
            subst_events(p.right, mapping),
        )
    if isinstance(p, Hide):
        return Hide(subst_events(p.body, mapping), frozenset(_subst_ev(e, mapping) for e in p.events))
    if isinstance(p, Rename):
        pairs = frozenset((_subst_ev(a, mapping), _subst_ev(b, mapping)) for a, b in p.pairs)
        return Rename(subst_events(p.body, mapping), pairs)
    if isinstance(p, Call):
        return Call(p.name, tuple(_subst_ev(a, mapping) for a in p.args))
    if isinstance(p, IntChoiceMany):
        return IntChoiceMany(tuple(subst_events(b, mapping) for b in p.branches))
    changes = {n: subst_events(c, mapping) for n, c in _children(p) if not isinstance(n, int)}
    if changes:
        return _rebuild(p, **changes)
    return p


# --- pretty printing ------------------------------------------------------
#
# Levels: 0 atoms, 1 postfix (hide, rename), 2 prefixing, 3 choice,
# 4 parallel/interleave.  Mixed choice operators always get parentheses,
# matching the parser, which rejects unparenthesised mixed choice.

_CHOICE_OPS = {ExtChoice: "[]", IntChoice: "|~|", Timeout: "[>"}


def _ev_set(events, sort_hint=None) -> str:
    members = sorted(events)
    return "{" + ",".join(members) + "}"


def pretty(p, level: int = 4) -> str:
    text, my_level = _pretty(p)
    if my_level > level:
        return "(" + text + ")"
    return text


def _pretty(p):
    if isinstance(p, Stop):
        return "STOP", 0
    if isinstance(p, Div):
        return "DIV", 0
    if isinstance(p, Var):
        return p.name, 0
    if isinstance(p, Call):
        if p.args:
            return f"{p.name}({', '.join(p.args)})", 0
        return p.name, 0
    if isinstance(p, Hide):
        return f"{pretty(p.body, 1)} \\ {_ev_set(p.events)}", 1
    if isinstance(p, Rename):
        pairs = ", ".join(f"{a} <- {b}" for a, b in sorted(p.pairs))
        return f"{pretty(p.body, 1)}[[{pairs}]]", 1
    if isinstance(p, Prefix):
        return f"{p.event} -> {pretty(p.body, 2)}", 2
    if isinstance(p, InputPrefix):
        return f"? {p.binder} : {_ev_set(p.events)} -> {pretty(p.body, 2)}", 2
    if isinstance(p, Mu):
        # the body extends to the end of the enclosing bracket, so a Mu used
        # as an operand is always parenthesised by its context
        return f"mu {p.var} @ {pretty(p.body, 4)}", 2
    if isinstance(p, (ExtChoice, IntChoice, Timeout)):
        op = _CHOICE_OPS[type(p)]
        left = _pretty_choice_operand(p.left, type(p))
        right = pretty(p.right, 2)
        return f"{left} {op} {right}", 3
    if isinstance(p, IntChoiceMany):
        parts = [_pretty_choice_operand(b, IntChoice) if isinstance(b, (ExtChoice, IntChoice, Timeout, IntChoiceMany)) else pretty(b, 2) for b in p.branches]
        if len(parts) == 1:
            return parts[0], 2
        return " |~| ".join(parts), 3
    if isinstance(p, Interleave):
        left = _pretty_par_operand(p.left)
        return f"{left} ||| {pretty(p.right, 3)}", 4
    if isinstance(p, Parallel):
        left = _pretty_par_operand(p.left)
        sync = f"[{_ev_set(p.left_events)} || {_ev_set(p.right_events)}]"
        return f"{left} {sync} {pretty(p.right, 3)}", 4
    raise TypeError(f"not a process: {p!r}")


def _pretty_choice_operand(p, op_type):
    # same operator chains associate left without parentheses; different
    # choice operators must be parenthesised
    if isinstance(p, (ExtChoice, IntChoice, Timeout)) and not isinstance(p, op_type):
        return "(" + _pretty(p)[0] + ")"
    if isinstance(p, IntChoiceMany) and op_type is not IntChoice:
        return "(" + _pretty(p)[0] + ")"
    return pretty(p, 3)


def _pretty_par_operand(p):
    return pretty(p, 4)


def pretty_env(env: SpecEnv) -> str:
    lines = ["alphabet {" + ",".join(env.alphabet.events) + "}"]
    for name, d in env.definitions.items():
        head = name if not d.params else f"{name}({', '.join(d.params)})"
        lines.append(f"{head} = {pretty(d.body)}")
    return "\n".join(lines) + "\n"


# --- well-formedness ------------------------------------------------------


def check_process(p, env: SpecEnv, bound_events=frozenset(), bound_vars=frozenset()):
    """Verify names resolve and every concrete event lies in the alphabet."""

    def chk_event(e):
        if e in bound_events_stack[-1]:
            return
        if e not in env.alphabet:
            raise SpecError(f"event {e!r} is not in the alphabet and not bound")

    bound_events_stack = [frozenset(bound_events)]
    bound_vars_stack = [frozenset(bound_vars)]

    def walk(t):
        if isinstance(t, (Stop, Div)):
            return
        if isinstance(t, Prefix):
            chk_event(t.event)
            walk(t.body)
        elif isinstance(t, InputPrefix):
            for e in t.events:
                chk_event(e)
            bound_events_stack.append(bound_events_stack[-1] | {t.binder})
            walk(t.body)
            bound_events_stack.pop()
        elif isinstance(t, (ExtChoice, IntChoice, Timeout, Interleave)):
            walk(t.left)
            walk(t.right)
        elif isinstance(t, IntChoiceMany):
            for b in t.branches:
                walk(b)
        elif isinstance(t, Parallel):
            for e in t.left_events | t.right_events:
                chk_event(e)
            walk(t.left)
            walk(t.right)
        elif isinstance(t, Hide):
            for e in t.events:
                chk_event(e)
            walk(t.body)
        elif isinstance(t, Rename):
            for a, b in t.pairs:
                chk_event(a)
                chk_event(b)
            walk(t.body)
        elif isinstance(t, Mu):
            bound_vars_stack.append(bound_vars_stack[-1] | {t.var})
            walk(t.body)
            bound_vars_stack.pop()
        elif isinstance(t, Var):
            if t.name not in bound_vars_stack[-1]:
                raise SpecError(f"unbound process variable: {t.name}")
        elif isinstance(t, Call):
            d = env.lookup(t.name)
            if len(t.args) != len(d.params):
                raise SpecError(
                    f"{t.name} takes {len(d.params)} argument(s), got {len(t.args)}"
                )
            for a in t.args:
                chk_event(a)
        else:
            raise SpecError(f"not a process term: {t!r}")

    walk(p)


def check_env(env: SpecEnv):
    for name, d in env.definitions.items():
        check_process(d.body, env, bound_events=frozenset(d.params))
