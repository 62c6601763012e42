"""Simulating availability observation with ordinary events.

The transform explores a process's transition system and rebuilds it as a
plain process whose states additionally carry a self-loop event for every
observable offer (every subset of the enabled events within the set
bound, the empty one included).  Offer events are flat dotted names:
``Offer.a.b`` for the offer {a,b} and ``Offer.0`` for the empty offer
(event names cannot start with a digit, so this cannot collide).  The
ordinary event traces of the result decode back to the availability
traces of the original.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import SpecError
from .kernel import TAU, Alphabet, ModelParams, normalize_trace
from .operational import StepEngine, build_lts
from .process import (
    Call, Definition, ExtChoice, IntChoiceMany, Prefix, SpecEnv, Stop,
    Timeout, pretty,
)

OFFER_PREFIX = "Offer."
EMPTY_OFFER_EVENT = "Offer.0"


def offer_event_name(offer: frozenset) -> str:
    if not offer:
        return EMPTY_OFFER_EVENT
    return OFFER_PREFIX + ".".join(sorted(offer))


def decode_offer_event(name: str):
    """The offer a simulation event stands for, or None for an ordinary
    event."""
    if not name.startswith(OFFER_PREFIX):
        return None
    rest = name[len(OFFER_PREFIX):]
    if rest == "0":
        return frozenset()
    return frozenset(rest.split("."))


def decode_trace(event_trace) -> tuple:
    """Availability trace encoded by a simulation event trace."""
    out = []
    for e in event_trace:
        offer = decode_offer_event(e)
        out.append(e if offer is None else offer)
    return normalize_trace(tuple(out))


@dataclass
class Simulation:
    env: SpecEnv
    root: str
    state_count: int

    def root_term(self) -> Call:
        return Call(self.root, ())


def _state_name(i: int) -> str:
    return f"S{i}"


def to_simulation(term, env: SpecEnv, params: ModelParams,
                  state_cap: int = 4096) -> Simulation:
    """Rebuild a process over ordinary events whose traces spell out the
    availability observations of the original at the given set bound."""
    for e in env.alphabet.events:
        if e == "Offer" or e.startswith(OFFER_PREFIX):
            raise SpecError(
                f"alphabet event {e!r} clashes with simulation offer events"
            )
    engine = StepEngine(env)
    states, transitions = build_lts(term, env, state_cap, engine)

    visible: dict = {}
    internal: dict = {}
    for i, lab, j in transitions:
        if lab is TAU:
            internal.setdefault(i, [])
            if j not in internal[i]:
                internal[i].append(j)
        else:
            visible.setdefault(i, [])
            if (lab, j) not in visible[i]:
                visible[i].append((lab, j))

    k = params.set_bound
    offer_names = set()
    definitions = {}
    for i, state in enumerate(states):
        enabled = sorted({lab for lab, _ in visible.get(i, ())})
        max_size = len(enabled) if k is None else min(k, len(enabled))
        branches = []
        for size in range(0, max_size + 1):
            for combo in itertools.combinations(enabled, size):
                name = offer_event_name(frozenset(combo))
                offer_names.add(name)
                branches.append(Prefix(name, Call(_state_name(i), ())))
        for lab, j in sorted(visible.get(i, ()), key=lambda e: (e[0], e[1])):
            branches.append(Prefix(lab, Call(_state_name(j), ())))
        body = branches[0]
        for b in branches[1:]:
            body = ExtChoice(body, b)
        targets = internal.get(i, [])
        if targets:
            cont = (
                Call(_state_name(targets[0]), ())
                if len(targets) == 1
                else IntChoiceMany(tuple(Call(_state_name(j), ()) for j in targets))
            )
            body = Timeout(body, cont)
        definitions[_state_name(i)] = Definition((), body)

    events = list(env.alphabet.events) + sorted(offer_names)
    sim_alphabet = Alphabet(events)
    sim_env = SpecEnv(sim_alphabet, definitions)
    return Simulation(sim_env, _state_name(0), len(states))


def emit_script(sim: Simulation) -> str:
    """Stable textual form of a simulation: a channel declaration for the
    offer events, the alphabet, and one definition per explored state."""
    lines = ["channel Offer : Set(Events)"]
    lines.append(
        "alphabet {" + ", ".join(sim.env.alphabet.events) + "}"
    )
    for i in range(len(sim.env.definitions)):
        name = _state_name(i)
        body = sim.env.definitions[name].body
        lines.append(f"{name} = {pretty(body)}")
    return "\n".join(lines) + "\n"
