"""Strong bisimulation minimization by iterated partition refinement.

Starting from one block, states are repeatedly split by their signature: the
set of (label, successor block) pairs. At the fixpoint two states share a
block iff they are strongly bisimilar. The quotient keeps one transition per
(block, label, block) triple and renumbers blocks by first occurrence in
state order, so the result is deterministic.
"""
from __future__ import annotations

from typing import Dict, List, Tuple

from .kernel import Action, Lts


def minimize(lts: Lts) -> Lts:
    blocks = partition(lts)
    nblocks = max(blocks) + 1 if blocks else 0
    if lts.num_states == 0:
        return Lts(0, 0, ())
    seen = set()
    quotient: List[Tuple[int, Action, int]] = []
    for src, act, dst in lts.transitions:
        t = (blocks[src], act, blocks[dst])
        if t not in seen:
            seen.add(t)
            quotient.append(t)
    return Lts(nblocks, blocks[lts.initial], tuple(quotient))


def partition(lts: Lts) -> List[int]:
    """Block index per state for the coarsest strong bisimulation partition.

    Blocks are numbered by first occurrence scanning states in index order.
    """
    n = lts.num_states
    if n == 0:
        return []
    # intern labels once; signature sets then hold small int pairs
    label_ids: Dict[Action, int] = {}
    out: List[List[Tuple[int, int]]] = [[] for _ in range(n)]
    for src, act, dst in lts.transitions:
        lid = label_ids.setdefault(act, len(label_ids))
        out[src].append((lid, dst))
    blocks = [0] * n
    nblocks = 1
    while True:
        sigs: Dict[Tuple[int, frozenset], int] = {}
        new_blocks = [0] * n
        for s in range(n):
            sig = (blocks[s], frozenset((lid, blocks[d]) for lid, d in out[s]))
            b = sigs.get(sig)
            if b is None:
                b = len(sigs)
                sigs[sig] = b
            new_blocks[s] = b
        if len(sigs) == nblocks:
            return new_blocks
        blocks = new_blocks
        nblocks = len(sigs)
