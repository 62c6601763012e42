"""Parser for spec files and process expressions.

Spec file format: optional ``alphabet {a,b,...}`` header, optional
``channel`` lines (accepted and ignored, so emitted simulation scripts can
be read back), ``#`` comments, and one definition per line::

    NAME = PROC
    NAME(x, y) = PROC

Expression grammar, loosest to tightest:

    par    := choice (("|||" | "[{A} || {B}]") choice)*      left-assoc
    choice := pre (OP pre)*   OP one of "[]", "|~|", "[>"    left-assoc,
              mixing different choice operators requires parentheses
    pre    := EVENT "->" pre | "? x : {..} ->" pre
            | "mu X @" par | "|~| x : {..} @" par            body extends right
    post   := atom ("\\ {..}" | "[[a <- b, ...]]")*
    atom   := "STOP" | "DIV" | NAME | NAME "(" args ")" | "(" par ")"

``STOP``, ``DIV``, ``mu``, ``alphabet``, and ``channel`` are reserved words.
Renaming is relational and not implicitly completed with identity: an event
with no image is blocked.
"""
from __future__ import annotations

import re

from .errors import ParseError, SpecError
from .kernel import EVENT_RE, Alphabet
from .process import (
    Call, Definition, Div, ExtChoice, Hide, InputPrefix, IntChoice,
    IntChoiceMany, Interleave, Mu, Parallel, Prefix, Rename, SpecEnv, Stop,
    Timeout, Var, check_env, check_process, subst_events,
)

_RESERVED = {"STOP", "DIV", "mu", "alphabet", "channel"}

_TOKEN_RE = re.compile(
    r"""\s*(?:
        (?P<punct>\|\|\||\|~\||\[\[|\]\]|\[\]|\[>|\|\||->|<-|[()\[\]{},:@=?\\])
      | (?P<ident>[A-Za-z][A-Za-z0-9_.]*)
    )""",
    re.VERBOSE,
)


class _Tokens:
    def __init__(self, text: str, line: int):
        self.line = line
        self.toks = []
        pos = 0
        while pos < len(text):
            if text[pos] == "#":
                break
            m = _TOKEN_RE.match(text, pos)
            if not m or m.end() == pos:
                rest = text[pos:].strip()
                if not rest:
                    break
                raise ParseError(f"bad character {rest[0]!r}", line, pos + 1)
            kind = "punct" if m.group("punct") else "ident"
            self.toks.append((kind, m.group(kind), m.start(kind) + 1))
            pos = m.end()
        self.i = 0

    def peek(self, ahead: int = 0):
        j = self.i + ahead
        return self.toks[j] if j < len(self.toks) else (None, None, None)

    def next(self):
        tok = self.peek()
        if tok[0] is None:
            raise ParseError("unexpected end of line", self.line, 0)
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, col = self.peek()
        if val != value:
            got = repr(val) if val is not None else "end of line"
            raise ParseError(f"expected {value!r}, got {got}", self.line, col or 0)
        self.i += 1

    def at_end(self) -> bool:
        return self.i >= len(self.toks)

    def error(self, msg: str):
        _, val, col = self.peek()
        raise ParseError(msg, self.line, col or 0)


class _ExprParser:
    def __init__(self, tokens: _Tokens, mu_vars=()):
        self.t = tokens
        self.mu_vars = list(mu_vars)

    def ident(self, what: str = "name") -> str:
        kind, val, col = self.t.peek()
        if kind != "ident":
            self.t.error(f"expected {what}")
        self.t.next()
        return val

    def event_name(self) -> str:
        name = self.ident("event name")
        if name in _RESERVED:
            raise ParseError(f"{name!r} is a reserved word", self.t.line, 0)
        return name

    def event_set(self) -> frozenset:
        self.t.expect("{")
        out = []
        if self.t.peek()[1] != "}":
            out.append(self.event_name())
            while self.t.peek()[1] == ",":
                self.t.next()
                out.append(self.event_name())
        self.t.expect("}")
        return frozenset(out)

    def parse(self):
        p = self.par()
        if not self.t.at_end():
            self.t.error("trailing input after process expression")
        return p

    def par(self):
        left = self.choice()
        while True:
            kind, val, _ = self.t.peek()
            if val == "|||":
                self.t.next()
                left = Interleave(left, self.choice())
            elif val == "[" and self.t.peek(1)[1] == "{":
                self.t.next()
                a = self.event_set()
                self.t.expect("||")
                b = self.event_set()
                self.t.expect("]")
                left = Parallel(left, a, b, self.choice())
            else:
                return left

    _CHOICE = {"[]": ExtChoice, "|~|": IntChoice, "[>": Timeout}

    def choice(self):
        left = self.pre()
        op_seen = None
        while True:
            kind, val, col = self.t.peek()
            if val in self._CHOICE:
                if op_seen is not None and val != op_seen:
                    raise ParseError(
                        f"mixing {op_seen!r} and {val!r} needs parentheses",
                        self.t.line, col,
                    )
                op_seen = val
                self.t.next()
                left = self._CHOICE[val](left, self.pre())
            else:
                return left

    def pre(self):
        kind, val, col = self.t.peek()
        if val == "?":
            self.t.next()
            binder = self.event_name()
            self.t.expect(":")
            events = self.event_set()
            self.t.expect("->")
            return InputPrefix(binder, events, self.pre())
        if val == "mu":
            self.t.next()
            var = self.ident("recursion variable")
            self.t.expect("@")
            self.mu_vars.append(var)
            body = self.par()
            self.mu_vars.pop()
            return Mu(var, body)
        if val == "|~|":
            self.t.next()
            binder = self.event_name()
            self.t.expect(":")
            members = self._ordered_event_list()
            self.t.expect("@")
            body = self.par()
            if not members:
                raise ParseError("indexed internal choice over an empty set", self.t.line, col)
            branches = tuple(subst_events(body, {binder: e}) for e in members)
            return IntChoiceMany(branches)
        if kind == "ident" and val not in _RESERVED and self.t.peek(1)[1] == "->":
            self.t.next()
            self.t.next()
            return Prefix(val, self.pre())
        return self.post()

    def _ordered_event_list(self):
        self.t.expect("{")
        out = []
        if self.t.peek()[1] != "}":
            out.append(self.event_name())
            while self.t.peek()[1] == ",":
                self.t.next()
                name = self.event_name()
                if name not in out:
                    out.append(name)
        self.t.expect("}")
        return out

    def post(self):
        p = self.atom()
        while True:
            val = self.t.peek()[1]
            if val == "\\":
                self.t.next()
                p = Hide(p, self.event_set())
            elif val == "[[":
                self.t.next()
                pairs = []
                if self.t.peek()[1] != "]]":
                    pairs.append(self._rename_pair())
                    while self.t.peek()[1] == ",":
                        self.t.next()
                        pairs.append(self._rename_pair())
                self.t.expect("]]")
                p = Rename(p, frozenset(pairs))
            else:
                return p

    def _rename_pair(self):
        a = self.event_name()
        self.t.expect("<-")
        b = self.event_name()
        return (a, b)

    def atom(self):
        kind, val, col = self.t.peek()
        if val == "(":
            self.t.next()
            p = self.par()
            self.t.expect(")")
            return p
        if val == "STOP":
            self.t.next()
            return Stop()
        if val == "DIV":
            self.t.next()
            return Div()
        if kind == "ident":
            if val in _RESERVED:
                raise ParseError(f"{val!r} is a reserved word", self.t.line, col)
            self.t.next()
            if val in self.mu_vars:
                return Var(val)
            if self.t.peek()[1] == "(":
                self.t.next()
                args = [self.event_name()]
                while self.t.peek()[1] == ",":
                    self.t.next()
                    args.append(self.event_name())
                self.t.expect(")")
                return Call(val, tuple(args))
            return Call(val)
        self.t.error("expected a process")


def _mentioned_events(p, bound):
    """Concrete events mentioned in a term, in first-mention order."""
    out = []

    def add(e):
        if e not in bound_stack[-1] and e not in out:
            out.append(e)

    bound_stack = [frozenset(bound)]

    def walk(t):
        if isinstance(t, Prefix):
            add(t.event)
            walk(t.body)
        elif isinstance(t, InputPrefix):
            for e in sorted(t.events):
                add(e)
            bound_stack.append(bound_stack[-1] | {t.binder})
            walk(t.body)
            bound_stack.pop()
        elif isinstance(t, (ExtChoice, IntChoice, Timeout, Interleave)):
            walk(t.left)
            walk(t.right)
        elif isinstance(t, IntChoiceMany):
            for b in t.branches:
                walk(b)
        elif isinstance(t, Parallel):
            for e in sorted(t.left_events | t.right_events):
                add(e)
            walk(t.left)
            walk(t.right)
        elif isinstance(t, Hide):
            for e in sorted(t.events):
                add(e)
            walk(t.body)
        elif isinstance(t, Rename):
            for a, b in sorted(t.pairs):
                add(a)
                add(b)
            walk(t.body)
        elif isinstance(t, Mu):
            walk(t.body)
        elif isinstance(t, Call):
            for a in t.args:
                add(a)

    walk(p)
    return out


def parse_spec(text: str) -> SpecEnv:
    declared = None
    raw_defs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        toks = _Tokens(raw, lineno)
        if toks.at_end():
            continue
        head = toks.peek()[1]
        if head == "alphabet":
            if declared is not None:
                raise ParseError("duplicate alphabet header", lineno, 1)
            toks.next()
            parser = _ExprParser(toks)
            members = parser._ordered_event_list()
            if not toks.at_end():
                toks.error("trailing input after alphabet header")
            declared = members
            continue
        if head == "channel":
            continue
        name_kind, name, col = toks.next()
        if name_kind != "ident" or name in _RESERVED:
            raise ParseError("expected a definition name", lineno, col)
        params = ()
        if toks.peek()[1] == "(":
            toks.next()
            parser = _ExprParser(toks)
            ps = [parser.event_name()]
            while toks.peek()[1] == ",":
                toks.next()
                ps.append(parser.event_name())
            toks.expect(")")
            params = tuple(ps)
            if len(set(params)) != len(params):
                raise ParseError(f"duplicate parameter in {name}", lineno, col)
        toks.expect("=")
        body = _ExprParser(toks).parse()
        raw_defs.append((lineno, name, params, body))

    definitions = {}
    for lineno, name, params, body in raw_defs:
        if name in definitions:
            raise ParseError(f"duplicate definition of {name}", lineno, 1)
        definitions[name] = Definition(params, body)

    mentioned = []
    for _, name, params, body in raw_defs:
        for e in _mentioned_events(body, params):
            if e not in mentioned:
                mentioned.append(e)
    if declared is not None:
        extra = [e for e in mentioned if e not in declared]
        if extra:
            raise SpecError(
                f"events used but not declared in the alphabet: {', '.join(extra)}"
            )
        events = declared
    else:
        events = mentioned
    if not events:
        raise SpecError(
            "empty alphabet: declare events in an alphabet header or use them"
        )
    env = SpecEnv(Alphabet(events), definitions)
    check_env(env)
    return env


def parse_process(text: str, env: SpecEnv):
    """Parse a standalone process expression in the context of a spec."""
    toks = _Tokens(text, 1)
    p = _ExprParser(toks).parse()
    check_process(p, env)
    return p
