"""Street-graph driving model.

The city is a directed graph whose edges are named streets and whose vertices
are crossroads. The car sits on a street (an edge); moving means picking one
of the outgoing edges of the street's head vertex, by index. Obstacles occupy
streets and follow finite scripts of operations.

build_control_composition wires six components around eleven gates:

    RADAR     --UPDATE_GRID-->       fed by the map, reports changes
    RADAR     --CURRENT_GRID-->      to ACTION
    GPS       --UPDATE_POSITION-->   fed by the map
    DECISION  --REQUEST_POSITION/CURRENT_POSITION--> GPS
    ACTION    --REQUEST_PATH--> DECISION (+ map, see below)
    DECISION  --CURRENT_PATH--> ACTION, or ARRIVAL with the map
    ACTION    --CAR_MOVE/COLLISION--> MAP
    OBSTACLES --OBSTACLE_MOVE/END_OBSTACLE--> MAP

REQUEST_PATH also synchronizes with the map so a path request can only fire
when the map is idle (post-move position/grid pushes delivered); otherwise
DECISION could plan from a stale GPS position and produce a turn index that
is invalid at the car's real street.
"""
from __future__ import annotations

import collections
import itertools
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple, Union

from .kernel import Action, Component, Composition
from .values import Nat, Rec, Seq, Sym, Value, sort_key

BRAKES = "brakes"
LEAVE = "leave"
RANDOM = "random"


@dataclass(frozen=True)
class Turn:
    """Take the n-th outgoing street at the current street's head vertex."""
    n: int


Control = Union[Turn, str]  # Turn or BRAKES
Op = Union[Turn, str]       # Turn, LEAVE or RANDOM (scripts only)


class MapError(ValueError):
    pass


Vertex = Union[int, str]


@dataclass(frozen=True)
class GraphMap:
    vertices: Tuple[Vertex, ...]
    edges: Tuple[Tuple[Vertex, str, Vertex], ...]  # (src, street, dst) in declaration order
    _edge_by_street: dict = field(default=None, repr=False, compare=False)
    _succ: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        vset = set(self.vertices)
        if len(vset) != len(self.vertices):
            raise MapError("duplicate vertices")
        by_street = {}
        succ: Dict[int, List[str]] = {v: [] for v in self.vertices}
        for src, street, dst in self.edges:
            if src not in vset or dst not in vset:
                raise MapError(f"edge {street} endpoint not a vertex")
            if street in by_street:
                raise MapError(f"duplicate street name {street}")
            by_street[street] = (src, dst)
            succ[src].append(street)
        object.__setattr__(self, "_edge_by_street", by_street)
        object.__setattr__(self, "_succ", succ)

    def streets(self) -> Tuple[str, ...]:
        return tuple(s for _, s, _ in self.edges)

    def has_street(self, street: str) -> bool:
        return street in self._edge_by_street

    def head(self, street: str) -> int:
        """The vertex a car on this street is driving towards."""
        return self._edge_by_street[street][1]


def successors(gmap: GraphMap, street: str) -> Tuple[str, ...]:
    """Streets leaving the head vertex of street, in edge declaration order."""
    if not gmap.has_street(street):
        raise MapError(f"unknown street {street}")
    return tuple(gmap._succ[gmap.head(street)])


def consistent_move(gmap: GraphMap, street: str, control: Control, target: str) -> bool:
    """Does applying control on street legitimately land on target?"""
    if control == BRAKES:
        return target == street
    if isinstance(control, Turn):
        succ = successors(gmap, street)
        return 0 <= control.n < len(succ) and target == succ[control.n]
    raise MapError(f"not a control: {control!r}")


def expand_random(gmap: GraphMap, street: str) -> Tuple[Op, ...]:
    """Concrete operations a 'random' script entry can resolve to."""
    return tuple(Turn(i) for i in range(len(successors(gmap, street)))) + (LEAVE,)


@dataclass(frozen=True)
class Itinerary:
    controls: Tuple[Turn, ...]
    reachable: bool


def compute_itinerary(gmap: GraphMap, origin: str, destination: str,
                      blocked: FrozenSet[str] = frozenset()) -> Itinerary:
    """Shortest control sequence from origin to destination avoiding blocked
    streets. Ties resolve to the smallest successor index at the earliest
    divergence point, which is what breadth-first search with in-order
    expansion and first-visit-wins produces. The origin may be blocked (the
    car is already there); a blocked destination is unreachable.
    """
    for s in (origin, destination):
        if not gmap.has_street(s):
            raise MapError(f"unknown street {s}")
    if origin == destination:
        return Itinerary((), True)
    parent: Dict[str, Tuple[str, Turn]] = {origin: None}
    queue = collections.deque([origin])
    while queue:
        cur = queue.popleft()
        for i, nxt in enumerate(successors(gmap, cur)):
            if nxt in blocked or nxt in parent:
                continue
            parent[nxt] = (cur, Turn(i))
            if nxt == destination:
                controls = []
                back = nxt
                while parent[back] is not None:
                    prev, turn = parent[back]
                    controls.append(turn)
                    back = prev
                return Itinerary(tuple(reversed(controls)), True)
            queue.append(nxt)
    return Itinerary((), False)


# ---------------------------------------------------------------------------
# label value encodings

def control_value(control: Control) -> Value:
    if control == BRAKES:
        return Sym(BRAKES)
    if isinstance(control, Turn):
        return Rec("turned_n", (Nat(control.n),))
    raise MapError(f"not a control: {control!r}")


def op_value(op: Op) -> Value:
    if op == LEAVE:
        return Sym(LEAVE)
    return control_value(op)


def grid_value(occupied) -> Value:
    return Rec("Radar", (Seq(tuple(Sym(s) for s in sorted(occupied))),))


def itinerary_value(it: Itinerary) -> Value:
    return Seq(tuple(control_value(c) for c in it.controls))


# ---------------------------------------------------------------------------
# scenario and composition

@dataclass(frozen=True)
class ObstacleScript:
    street: str
    moves: Tuple[Op, ...]


@dataclass(frozen=True)
class ControlScenario:
    gmap: GraphMap
    car_street: str
    destination: str
    obstacles: Tuple[ObstacleScript, ...] = ()

    def __post_init__(self):
        for s in (self.car_street, self.destination):
            if not self.gmap.has_street(s):
                raise MapError(f"unknown street {s}")
        seen = set()
        for i, ob in enumerate(self.obstacles):
            if not self.gmap.has_street(ob.street):
                raise MapError(f"obstacle {i} on unknown street {ob.street}")
            if ob.street == self.car_street or ob.street in seen:
                raise MapError(f"obstacle {i} starts on an occupied street")
            seen.add(ob.street)
            for m in ob.moves:
                if not (m in (LEAVE, RANDOM) or isinstance(m, Turn)):
                    raise MapError(f"obstacle {i}: bad op {m!r}")


def _obstacle_reach(gmap: GraphMap, script: ObstacleScript):
    """All streets (or None once gone) the obstacle can ever occupy.

    Over-approximates: blocked moves keep the obstacle in place, which the
    prefix union already covers.
    """
    cur = {script.street}
    reach = {script.street}
    for m in script.moves:
        nxt = set()
        for s in cur:
            if s is None:
                continue
            ops = expand_random(gmap, s) if m == RANDOM else (m,)
            for op in ops:
                if op == LEAVE:
                    nxt.add(None)
                elif isinstance(op, Turn):
                    succ = successors(gmap, s)
                    nxt.add(succ[op.n] if op.n < len(succ) else s)
        cur = nxt
        reach |= nxt
    return reach


def radar_grid_universe(scn: ControlScenario) -> List[tuple]:
    """Every radar grid (sorted street tuple) the map could ever push."""
    reaches = [sorted(_obstacle_reach(scn.gmap, ob), key=lambda s: (s is None, s))
               for ob in scn.obstacles]
    grids = set()
    for combo in itertools.product(*reaches) if reaches else [()]:
        grids.add(tuple(sorted({s for s in combo if s is not None})))
    return sorted(grids)


def build_control_composition(scn: ControlScenario) -> Composition:
    gmap = scn.gmap
    streets = gmap.streets()
    grids = radar_grid_universe(scn)
    grid_values = {g: grid_value(g) for g in grids}

    itinerary_values = {}
    for s in streets:
        for g in grids:
            it = compute_itinerary(gmap, s, scn.destination, frozenset(g))
            itinerary_values[(s, g)] = itinerary_value(it)
    itinerary_universe = sorted({v for v in itinerary_values.values()},
                                key=sort_key)

    # --- RADAR: mirrors the map's grid, reports changes to ACTION
    def radar_step(st):
        known, last_sent = st
        out = [(Action("UPDATE_GRID", (grid_values[g],)), (g, last_sent)) for g in grids]
        if known is not None and known != last_sent:
            out.append((Action("CURRENT_GRID", (grid_values[known],)), (known, known)))
        return out

    radar = Component("RADAR", frozenset({"UPDATE_GRID", "CURRENT_GRID"}),
                      (None, None), radar_step)

    # --- GPS: tracks the exact street, answers position requests
    def gps_step(st):
        street, answering = st
        if answering:
            return [(Action("CURRENT_POSITION", (Sym(street),)), (street, False))]
        out = [(Action("UPDATE_POSITION", (Sym(s),)), (s, False)) for s in streets]
        out.append((Action("REQUEST_POSITION"), (street, True)))
        return out

    gps = Component("GPS",
                    frozenset({"UPDATE_POSITION", "REQUEST_POSITION", "CURRENT_POSITION"}),
                    (scn.car_street, False), gps_step)

    # --- DECISION: turns (position, perceived grid) into an itinerary
    def decision_step(st):
        tag = st[0]
        if tag == "idle":
            return [(Action("REQUEST_PATH", (grid_values[g],)), ("asked", g)) for g in grids]
        if tag == "asked":
            return [(Action("REQUEST_POSITION"), ("awaiting", st[1]))]
        if tag == "awaiting":
            g = st[1]
            out = []
            for s in streets:
                if s == scn.destination:
                    nxt = ("arrival",)
                else:
                    nxt = ("reply", itinerary_values[(s, g)])
                out.append((Action("CURRENT_POSITION", (Sym(s),)), nxt))
            return out
        if tag == "arrival":
            return [(Action("ARRIVAL"), ("done",))]
        if tag == "reply":
            return [(Action("CURRENT_PATH", (st[1],)), ("idle",))]
        return []  # done

    decision = Component("DECISION",
                         frozenset({"REQUEST_PATH", "REQUEST_POSITION", "CURRENT_POSITION",
                                    "CURRENT_PATH", "ARRIVAL"}),
                         ("idle",), decision_step)

    # --- ACTION: drives, braking when perception changed under its feet
    def action_step(st):
        tag = st[0]
        out = []
        if tag != "halted":
            out.append((Action("COLLISION"), ("halted",)))
        if tag == "wait":
            g = st[1]
            for g2 in grids:
                if g2 != g:
                    out.append((Action("CURRENT_GRID", (grid_values[g2],)), ("request", g2)))
        elif tag == "request":
            g = st[1]
            for g2 in grids:
                out.append((Action("CURRENT_GRID", (grid_values[g2],)), ("request", g2)))
            out.append((Action("REQUEST_PATH", (grid_values[g],)), ("awaiting", g, g)))
        elif tag == "awaiting":
            _, g_sent, g_now = st
            for g2 in grids:
                out.append((Action("CURRENT_GRID", (grid_values[g2],)), ("awaiting", g_sent, g2)))
            for itin in itinerary_universe:
                if not itin.items:
                    nxt = ("wait", g_now)
                elif g_now != g_sent:
                    nxt = ("brake", g_now)
                else:
                    nxt = ("move", itin.items[0], g_now)
                out.append((Action("CURRENT_PATH", (itin,)), nxt))
        elif tag == "brake":
            out.append((Action("CAR_MOVE", (Sym(BRAKES),)), ("request", st[1])))
        elif tag == "move":
            out.append((Action("CAR_MOVE", (st[1],)), ("request", st[2])))
        return out

    action = Component("ACTION",
                       frozenset({"CURRENT_GRID", "REQUEST_PATH", "CURRENT_PATH",
                                  "CAR_MOVE", "COLLISION"}),
                       ("wait", None), action_step)

    # --- OBSTACLES: all scripts under one roof; the label carries the index
    def obstacles_step(st):
        out = []
        for i, (street, remaining, ended) in enumerate(st):
            if not remaining:
                if not ended:
                    sub = (street, remaining, True)
                    out.append((Action("END_OBSTACLE", (Nat(i),)),
                                st[:i] + (sub,) + st[i + 1:]))
                continue
            m = remaining[0]
            ops = expand_random(gmap, street) if m == RANDOM else (m,)
            for op in ops:
                if op == LEAVE:
                    sub = (None, (), False)
                    offers = (Nat(i), Sym(LEAVE), Sym(street))
                elif isinstance(op, Turn):
                    succ = successors(gmap, street)
                    if op.n >= len(succ):
                        continue  # invalid scripted turn never fires
                    sub = (succ[op.n], remaining[1:], False)
                    offers = (Nat(i), op_value(op), Sym(succ[op.n]))
                else:
                    raise MapError(f"bad op {op!r}")
                out.append((Action("OBSTACLE_MOVE", offers), st[:i] + (sub,) + st[i + 1:]))
        return out

    obstacles_init = tuple((ob.street, tuple(ob.moves), False) for ob in scn.obstacles)
    obstacles = Component("OBSTACLES", frozenset({"OBSTACLE_MOVE", "END_OBSTACLE"}),
                          obstacles_init, obstacles_step)

    # --- MAP_MANAGEMENT: ground truth, validity filter, update pushes
    def grid_of(obst):
        return tuple(sorted(s for s in obst if s is not None))

    def map_step(st):
        phase, car, obst, live = st
        out = []
        if phase == "init":
            out.append((Action("UPDATE_GRID", (grid_values[grid_of(obst)],)),
                        ("idle", car, obst, live)))
        elif phase == "idle":
            occupied = set(obst) - {None}
            for i, s in enumerate(obst):
                if s is None or not live[i]:
                    continue
                out.append((Action("OBSTACLE_MOVE", (Nat(i), Sym(LEAVE), Sym(s))),
                            ("push_grid", car, obst[:i] + (None,) + obst[i + 1:], live)))
                for k, target in enumerate(successors(gmap, s)):
                    if target == car or target in occupied:
                        continue
                    out.append((Action("OBSTACLE_MOVE",
                                       (Nat(i), control_value(Turn(k)), Sym(target))),
                                ("push_grid", car, obst[:i] + (target,) + obst[i + 1:], live)))
            for i, alive in enumerate(live):
                if not alive:
                    continue
                live2 = live[:i] + (False,) + live[i + 1:]
                nxt = "halted" if (live and not any(live2)) else "idle"
                out.append((Action("END_OBSTACLE", (Nat(i),)), (nxt, car, obst, live2)))
            out.append((Action("CAR_MOVE", (Sym(BRAKES),)), ("push_pos", car, obst, live)))
            for k, target in enumerate(successors(gmap, car)):
                nxt = "collision" if target in occupied else "push_pos"
                out.append((Action("CAR_MOVE", (control_value(Turn(k)),)),
                            (nxt, target, obst, live)))
            for g in grids:
                out.append((Action("REQUEST_PATH", (grid_values[g],)), st))
            out.append((Action("ARRIVAL"), ("halted", car, obst, live)))
        elif phase == "push_pos":
            out.append((Action("UPDATE_POSITION", (Sym(car),)), ("push_grid", car, obst, live)))
        elif phase == "push_grid":
            out.append((Action("UPDATE_GRID", (grid_values[grid_of(obst)],)),
                        ("idle", car, obst, live)))
        elif phase == "collision":
            out.append((Action("COLLISION"), ("halted", car, obst, live)))
        return out

    map_init = ("init", scn.car_street,
                tuple(ob.street for ob in scn.obstacles),
                tuple(True for _ in scn.obstacles))
    map_mgmt = Component("MAP_MANAGEMENT",
                         frozenset({"UPDATE_GRID", "UPDATE_POSITION", "REQUEST_PATH",
                                    "OBSTACLE_MOVE", "END_OBSTACLE", "CAR_MOVE",
                                    "COLLISION", "ARRIVAL"}),
                         map_init, map_step)

    return Composition([radar, gps, decision, action, obstacles, map_mgmt])
