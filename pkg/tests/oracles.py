"""Independent reference implementations the tests compare against.

Everything here is deliberately written with different algorithms and data
layouts than the package: set-comprehension rendezvous semantics, a naive
greatest-fixpoint bisimulation, a solved attacker/defender game, and exact
rational geometry for line-of-sight.
"""
from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Dict, FrozenSet, List, Set, Tuple

from avmodels.kernel import Action, Component, Composition, Lts
from avmodels.values import Bool, Nat, Pos, Sym


# ---------------------------------------------------------------------------
# rendezvous semantics, the slow obvious way

def brute_force_edges(comp: Composition):
    """All reachable global transitions as a set of (state, action, state),
    computed by direct application of the composition rule: an action with a
    synchronized gate needs every component listing that gate to take part
    with identical offers; everything else moves one component alone.
    """
    comps = comp.components
    participants: Dict[str, Tuple[int, ...]] = {}
    for i, c in enumerate(comps):
        for g in c.sync_set:
            participants.setdefault(g, ())
            participants[g] += (i,)

    def moves(state):
        found = set()
        per = [c.step(s) for c, s in zip(comps, state)]
        # independent moves: internal actions and unsynchronized gates
        for i, steps in enumerate(per):
            for act, nxt in steps:
                if act.gate in participants and not act.is_internal:
                    continue
                ns = list(state)
                ns[i] = nxt
                found.add((act, tuple(ns)))
        # rendezvous: every participant of the gate, identical offers
        for gate, members in participants.items():
            options = []
            for i in members:
                options.append([(act, nxt) for act, nxt in per[i]
                                if act.gate == gate])
            for pick in itertools.product(*options):
                offers = {act.offers for act, _ in pick}
                if len(offers) != 1:
                    continue
                ns = list(state)
                for i, (_, nxt) in zip(members, pick):
                    ns[i] = nxt
                found.add((pick[0][0], tuple(ns)))
        return found

    init = tuple(c.initial for c in comps)
    seen = {init}
    frontier = [init]
    edges = set()
    while frontier:
        nxt_frontier = []
        for st in frontier:
            for act, ns in moves(st):
                edges.add((st, act, ns))
                if ns not in seen:
                    seen.add(ns)
                    nxt_frontier.append(ns)
        frontier = nxt_frontier
    return init, seen, edges


def lts_edge_set(lts: Lts):
    """The explored LTS as payload-keyed edges, for semantic comparison."""
    pay = lts.state_payload
    return (pay[lts.initial],
            set(pay),
            {(pay[s], a, pay[d]) for s, a, d in lts.transitions})


# ---------------------------------------------------------------------------
# bisimulation, two more ways

def naive_bisimulation(lts: Lts) -> Set[Tuple[int, int]]:
    """Greatest fixpoint of the bisimulation functional on the full relation."""
    n = lts.num_states
    out: List[Dict[str, List[Tuple[Action, int]]]] = [dict() for _ in range(n)]
    for s, a, d in lts.transitions:
        out[s].setdefault(a.text(), []).append((a, d))
    rel = {(p, q) for p in range(n) for q in range(n)}

    def simulates(p, q, rel):
        for label, steps in out[p].items():
            answers = out[q].get(label, [])
            for _, pd in steps:
                if not any((pd, qd) in rel for _, qd in answers):
                    return False
        return True

    changed = True
    while changed:
        changed = False
        keep = set()
        for p, q in rel:
            if simulates(p, q, rel) and simulates(q, p, rel):
                keep.add((p, q))
            else:
                changed = True
        rel = keep
    return rel


def game_bisimulation(lts: Lts) -> Set[Tuple[int, int]]:
    """Pairs where the defender wins the bisimulation game, by solving the
    safety game over an explicit arena with attractor iteration.

    Positions: ("A", p, q) attacker to move; ("D", label, p2, q, side)
    defender must answer the attacker's move. The attacker wins exactly the
    positions in the least set containing stuck-defender positions and closed
    under "attacker has a move into the set" / "defender has only moves into
    the set".
    """
    n = lts.num_states
    out: List[Dict[str, List[int]]] = [dict() for _ in range(n)]
    for s, a, d in lts.transitions:
        out[s].setdefault(a.text(), []).append(d)

    apos = [("A", p, q) for p in range(n) for q in range(n)]
    succs: Dict[tuple, List[tuple]] = {}
    for p, q in itertools.product(range(n), range(n)):
        ms = []
        for label, dests in out[p].items():
            ms += [("D", label, d, q, "L") for d in dests]
        for label, dests in out[q].items():
            ms += [("D", label, d, p, "R") for d in dests]
        succs[("A", p, q)] = ms
        for m in ms:
            if m not in succs:
                _, label, moved, other, side = m
                replies = out[other].get(label, [])
                succs[m] = [("A", moved, r) if side == "L" else ("A", r, moved)
                            for r in replies]

    attacker_wins = {pos for pos in succs if pos[0] == "D" and not succs[pos]}
    changed = True
    while changed:
        changed = False
        for pos, nxt in succs.items():
            if pos in attacker_wins or not nxt:
                continue
            if pos[0] == "A":
                win = any(m in attacker_wins for m in nxt)
            else:
                win = all(m in attacker_wins for m in nxt)
            if win:
                attacker_wins.add(pos)
                changed = True
    return {(pos[1], pos[2]) for pos in apos if pos not in attacker_wins}


def partition_to_relation(blocks: List[int]) -> Set[Tuple[int, int]]:
    return {(p, q) for p in range(len(blocks)) for q in range(len(blocks))
            if blocks[p] == blocks[q]}


def bisimilar_by_game(a: Lts, b: Lts) -> bool:
    """Whether the initial states of two LTSs are bisimilar, by playing the
    bisimulation game only where it can actually go: explore the pairs
    reachable from the roots (each attacker move recorded with its defender
    replies), then peel off the pairs the attacker wins by backwards
    attractor iteration. The roots are bisimilar iff their pair survives.

    Unlike game_bisimulation above, this never builds the full n*n arena, so
    it stays cheap when one side is a minimized copy of the other.
    """
    def table(lts: Lts) -> List[Dict[str, List[int]]]:
        out: List[Dict[str, List[int]]] = [dict() for _ in range(lts.num_states)]
        for s, act, d in lts.transitions:
            out[s].setdefault(act.text(), []).append(d)
        return out

    out_a, out_b = table(a), table(b)
    root = (a.initial, b.initial)
    challenges: Dict[tuple, List[List[tuple]]] = {}
    parents: Dict[tuple, List[tuple]] = {}
    losing: Set[tuple] = set()
    seen = {root}
    frontier = [root]
    while frontier:
        pair = frontier.pop()
        p, q = pair
        chal: List[List[tuple]] = []
        for label, dests in out_a[p].items():
            replies = out_b[q].get(label, [])
            chal += [[(d, r) for r in replies] for d in dests]
        for label, dests in out_b[q].items():
            replies = out_a[p].get(label, [])
            chal += [[(r, d) for r in replies] for d in dests]
        challenges[pair] = chal
        for replies in chal:
            if not replies:
                losing.add(pair)
            for nxt in replies:
                parents.setdefault(nxt, []).append(pair)
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
    work = list(losing)
    while work:
        bad = work.pop()
        for parent in parents.get(bad, ()):
            if parent in losing:
                continue
            if any(replies and all(r in losing for r in replies)
                   for replies in challenges[parent]):
                losing.add(parent)
                work.append(parent)
    return root not in losing


# ---------------------------------------------------------------------------
# exact line-of-sight geometry

def exact_supercover(a, b) -> Set[Tuple[int, int]]:
    """Every grid cell whose closed unit square meets the closed segment from
    the center of a to the center of b, by rational clipping."""
    ax, ay = Fraction(2 * a[0] + 1, 2), Fraction(2 * a[1] + 1, 2)
    bx, by = Fraction(2 * b[0] + 1, 2), Fraction(2 * b[1] + 1, 2)
    dx, dy = bx - ax, by - ay
    cells = set()
    for i in range(min(a[0], b[0]), max(a[0], b[0]) + 1):
        for j in range(min(a[1], b[1]), max(a[1], b[1]) + 1):
            t0, t1 = Fraction(0), Fraction(1)
            ok = True
            for delta, lo, hi, start in ((dx, i, i + 1, ax), (dy, j, j + 1, ay)):
                if delta == 0:
                    if not (lo <= start <= hi):
                        ok = False
                        break
                    continue
                ta = Fraction(lo - start, delta)
                tb = Fraction(hi - start, delta)
                if ta > tb:
                    ta, tb = tb, ta
                t0, t1 = max(t0, ta), min(t1, tb)
            if ok and t0 <= t1:
                cells.add((i, j))
    return cells


def exact_occluded(opaque_cells, origin, target) -> bool:
    between = exact_supercover(origin, target) - {origin, target}
    return any(c in opaque_cells for c in between)


def oracle_perception(m, prev=None, prev_car=None):
    """The 5x5 lidar window rebuilt from scratch: exact rational
    line-of-sight instead of the integer walk, and a dictionary of
    previously seen absolute cells instead of window-relative indexing
    for the M/N freshness flags.
    """
    opaque = {(x, y)
              for y in range(m.height) for x in range(m.width)
              if m.cells[y][x] is not None and not m.table[m.cells[y][x]][1]}
    seen: Dict[Tuple[int, int], str] = {}
    if prev is not None and prev_car is not None:
        for py in range(5):
            for px in range(5):
                seen[(prev_car[0] + px - 2, prev_car[1] + py - 2)] = prev[py][px]
    cx, cy = m.car
    rows = []
    for dy in range(-2, 3):
        row = []
        for dx in range(-2, 3):
            cell = (cx + dx, cy + dy)
            if dx == 0 and dy == 0:
                row.append("C")
                continue
            inside = 0 <= cell[0] < m.width and 0 <= cell[1] < m.height
            if not inside or exact_occluded(opaque, (cx, cy), cell):
                row.append("U")
                continue
            occ = m.cells[cell[1]][cell[0]]
            if occ is None:
                row.append("F")
                continue
            fresh = seen.get(cell) == "F"
            if m.table[occ][1]:
                row.append("N" if fresh else "T")
            else:
                row.append("M" if fresh else "O")
        rows.append(tuple(row))
    return tuple(rows)


# ---------------------------------------------------------------------------
# random generators (deterministic under a seed)

_POOL = (Nat(0), Nat(1), Nat(2), Bool(True), Bool(False),
         Sym("go"), Sym("stop"), Pos(0, 1), Pos(2, 2))


def random_composition(rng: random.Random, max_components=3, max_states=4,
                       gates=("a", "b", "c")) -> Composition:
    ncomp = rng.randint(1, max_components)
    comps = []
    for ci in range(ncomp):
        nstates = rng.randint(1, max_states)
        sync = frozenset(g for g in gates if rng.random() < 0.5)
        table: Dict[int, List[Tuple[Action, int]]] = {}
        for s in range(nstates):
            steps = []
            for _ in range(rng.randint(0, 3)):
                if rng.random() < 0.2:
                    act = Action("i")
                else:
                    gate = rng.choice(list(sync)) if sync and rng.random() < 0.8 \
                        else rng.choice(gates)
                    if gate not in sync:
                        gate = gate + "_loc"  # unsynchronized, interleaves
                    offers = tuple(rng.choice(_POOL)
                                   for _ in range(rng.randint(0, 2)))
                    act = Action(gate, offers)
                steps.append((act, rng.randrange(nstates)))
            table[s] = steps
        comps.append(Component(f"P{ci}", sync, 0,
                               lambda s, t=table: t[s]))
    return Composition(tuple(comps))


def random_lts(rng: random.Random, max_states=200, labels=("a", "b", "c", "d")) -> Lts:
    n = rng.randint(1, max_states)
    transitions = []
    for s in range(n):
        for _ in range(rng.randint(0, 3)):
            transitions.append((s, Action(rng.choice(labels)), rng.randrange(n)))
    return Lts(n, 0, tuple(transitions))
