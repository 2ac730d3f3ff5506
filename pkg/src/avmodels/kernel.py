"""Multiway-rendezvous composition kernel and explicit-state exploration.

Components are state machines whose step function lists (action, next-state)
pairs. An action on gate g is enabled in the composition iff every component
that lists g in its sync set offers g with identical offer values; all of them
advance together. Actions on gates outside every sync set move only their
owner, as does the internal action.

Global states are tuples of component states. Component states must be
hashable and should be built from tuples/strings/ints so exploration order is
reproducible across processes.
"""
from __future__ import annotations

import collections
from dataclasses import dataclass, field
from typing import Callable, Dict, Hashable, List, Optional, Set, Tuple

from . import values
from .values import Value

INTERNAL_GATE = "i"


@dataclass(frozen=True)
class Action:
    gate: str
    offers: Tuple[Value, ...] = ()

    @property
    def is_internal(self) -> bool:
        return self.gate == INTERNAL_GATE

    def text(self) -> str:
        if not self.offers:
            return self.gate
        return self.gate + " " + " ".join("!" + values.text(v) for v in self.offers)

    def sort_key(self):
        return (self.gate, tuple(values.sort_key(v) for v in self.offers))


INTERNAL = Action(INTERNAL_GATE)


def parse_action(label: str) -> Action:
    """Parse a canonical label back into an action.

    Raises values.ValueError_ when the text is not in canonical form.
    """
    if not label or label != label.strip():
        raise values.ValueError_(f"bad label {label!r}")
    parts = label.split(" ")
    gate = parts[0]
    if not values._NAME_RE.match(gate):
        raise values.ValueError_(f"bad gate name {gate!r}")
    offers = []
    for p in parts[1:]:
        if not p.startswith("!"):
            raise values.ValueError_(f"bad offer {p!r} in {label!r}")
        offers.append(values.parse_value(p[1:]))
    return Action(gate, tuple(offers))


StepFn = Callable[[Hashable], List[Tuple[Action, Hashable]]]


@dataclass(frozen=True)
class Component:
    id: str
    sync_set: frozenset
    initial: Hashable
    step: StepFn = field(compare=False)

    def __post_init__(self):
        if INTERNAL_GATE in self.sync_set:
            raise CompositionError(f"component {self.id}: '{INTERNAL_GATE}' cannot be synchronized")


class CompositionError(ValueError):
    pass


class Composition:
    """A closed system of components with per-gate synchronization sets."""

    def __init__(self, components):
        self.components: Tuple[Component, ...] = tuple(components)
        if not self.components:
            raise CompositionError("empty composition")
        ids = [c.id for c in self.components]
        if len(set(ids)) != len(ids):
            raise CompositionError(f"duplicate component ids in {ids}")
        sync_map: Dict[str, List[int]] = {}
        for i, c in enumerate(self.components):
            for g in sorted(c.sync_set):
                sync_map.setdefault(g, []).append(i)
        self.sync_map: Dict[str, Tuple[int, ...]] = {g: tuple(m) for g, m in sync_map.items()}
        # step cache: (component index, local state) -> (solo list, gate -> offers -> successor list)
        self._steps: Dict[Tuple[int, Hashable], tuple] = {}

    @property
    def initial_state(self) -> tuple:
        return tuple(c.initial for c in self.components)

    def _component_steps(self, i: int, local: Hashable):
        key = (i, local)
        hit = self._steps.get(key)
        if hit is not None:
            return hit
        solo: List[Tuple[Action, Hashable]] = []
        synced: Dict[str, Dict[Tuple[Value, ...], List[Tuple[Action, Hashable]]]] = {}
        comp = self.components[i]
        seen = set()
        for act, nxt in comp.step(local):
            if (act, nxt) in seen:
                continue
            seen.add((act, nxt))
            if act.gate in self.sync_map:
                if act.gate not in comp.sync_set:
                    raise CompositionError(
                        f"component {comp.id} emits synchronized gate {act.gate} "
                        f"without listing it in its sync set"
                    )
                synced.setdefault(act.gate, {}).setdefault(act.offers, []).append((act, nxt))
            else:
                solo.append((act, nxt))
        entry = (solo, synced)
        self._steps[key] = entry
        return entry

    def enabled_actions(self, state: tuple) -> List[Tuple[Action, tuple]]:
        """All enabled (action, successor) pairs, in deterministic order."""
        out: List[Tuple[Action, tuple]] = []
        per_comp = [self._component_steps(i, s) for i, s in enumerate(state)]
        for i, (solo, _) in enumerate(per_comp):
            for act, nxt in solo:
                succ = list(state)
                succ[i] = nxt
                out.append((act, tuple(succ)))
        for gate, members in self.sync_map.items():
            offer_maps = []
            ok = True
            for i in members:
                m = per_comp[i][1].get(gate)
                if not m:
                    ok = False
                    break
                offer_maps.append((i, m))
            if not ok:
                continue
            smallest = min(offer_maps, key=lambda im: len(im[1]))
            for offers in smallest[1]:
                choices = []
                for i, m in offer_maps:
                    alts = m.get(offers)
                    if alts is None:
                        break
                    choices.append((i, alts))
                else:
                    act = choices[0][1][0][0]
                    _emit_combos(out, state, act, choices)
        return out

    def enabled_set(self, state: tuple) -> Set[Tuple[Action, tuple]]:
        return set(self.enabled_actions(state))


def _emit_combos(out, state, act, choices):
    # cartesian product over each member's alternative next states
    stack = [(0, list(state))]
    while stack:
        k, succ = stack.pop()
        if k == len(choices):
            out.append((act, tuple(succ)))
            continue
        i, alts = choices[k]
        # reversed keeps emission in declaration order for the depth-first walk
        for _, nxt in reversed(alts):
            s2 = succ if len(alts) == 1 else list(succ)
            s2[i] = nxt
            stack.append((k + 1, s2))


@dataclass(frozen=True)
class ExplorationLimits:
    max_states: int = 1_000_000
    max_depth: int = 0  # 0 = unlimited

    def __post_init__(self):
        if self.max_states < 1:
            raise ValueError(f"max_states must be >= 1, got {self.max_states}")
        if self.max_depth < 0:
            raise ValueError(f"max_depth must be >= 0, got {self.max_depth}")


@dataclass
class Lts:
    """Explicit labelled transition system.

    States are 0..num_states-1 with indices assigned in breadth-first
    discovery order. state_payload, when present, maps indices back to the
    composition states they came from.
    """
    num_states: int
    initial: int
    transitions: Tuple[Tuple[int, Action, int], ...]
    state_payload: Optional[tuple] = None
    _out: Optional[list] = field(default=None, repr=False, compare=False)

    def outgoing(self) -> List[List[Tuple[Action, int]]]:
        if self._out is None:
            out: List[List[Tuple[Action, int]]] = [[] for _ in range(self.num_states)]
            for src, act, dst in self.transitions:
                out[src].append((act, dst))
            self._out = out
        return self._out

    def alphabet(self) -> Set[str]:
        return {a.gate for _, a, _ in self.transitions}


class ExplorationLimitError(Exception):
    """Raised when exploration hits a limit; carries what was discovered."""

    def __init__(self, partial: Lts, discovered: int, reason: str):
        super().__init__(f"exploration truncated ({reason}) after {discovered} states")
        self.partial = partial
        self.discovered = discovered
        self.reason = reason


def explore(comp: Composition, limits: ExplorationLimits = ExplorationLimits()) -> Lts:
    """Breadth-first reachable-state enumeration with duplicate detection."""
    init = comp.initial_state
    index: Dict[tuple, int] = {init: 0}
    payload: List[tuple] = [init]
    depth = [0]
    transitions: List[Tuple[int, Action, int]] = []
    queue = collections.deque([0])
    truncated: Optional[str] = None
    while queue:
        si = queue.popleft()
        if limits.max_depth and depth[si] >= limits.max_depth:
            if comp.enabled_actions(payload[si]):
                truncated = "max_depth"
                break
            continue
        emitted = set()
        for act, succ in comp.enabled_actions(payload[si]):
            if (act, succ) in emitted:
                continue
            emitted.add((act, succ))
            ti = index.get(succ)
            if ti is None:
                if len(payload) >= limits.max_states:
                    truncated = "max_states"
                    break
                ti = len(payload)
                index[succ] = ti
                payload.append(succ)
                depth.append(depth[si] + 1)
                queue.append(ti)
            transitions.append((si, act, ti))
        if truncated:
            break
    lts = Lts(len(payload), 0, tuple(transitions), tuple(payload))
    if truncated:
        raise ExplorationLimitError(lts, len(payload), truncated)
    return lts


def detect_deadlocks(lts: Lts) -> Set[int]:
    """States with no outgoing transitions."""
    has_out = [False] * lts.num_states
    for src, _, _ in lts.transitions:
        has_out[src] = True
    return {s for s in range(lts.num_states) if not has_out[s]}
