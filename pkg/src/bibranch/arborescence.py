"""Edmonds' minimum-weight arborescence algorithm with an integral dual.

The dual is produced level by level: at every level each non-root
(super)vertex receives the minimum reduced weight of its entering arcs,
which is then subtracted from those arcs.  Values received by original
vertices form ``singletons``; values received by contracted cycles form a
laminar family ``sets``.  Reduced weights never go negative, which is dual
feasibility, and every arc of the returned arborescence ends with reduced
weight zero on every level it survives, which is complementary slackness.
"""
from __future__ import annotations

from typing import Iterable, NamedTuple

from .errors import Infeasible, NegativeWeight
from .graph import Arc, Digraph

SUPER_ROOT = -1


class ArborescenceDual(NamedTuple):
    singletons: dict[int, int]
    sets: dict[frozenset[int], int]

    @property
    def value(self) -> int:
        return sum(self.singletons.values()) + sum(self.sets.values())

    def load(self, arc: Arc) -> int:
        """Left-hand side of the dual constraint of ``arc``."""
        if arc.head not in self.singletons:
            return 0
        return self.singletons[arc.head] + sum(
            val for X, val in self.sets.items() if arc.head in X and arc.tail not in X)


class Arborescence(NamedTuple):
    arcs: frozenset[int]
    weight: int
    dual: ArborescenceDual


def _reachable(D: Digraph, root: int) -> set[int]:
    adj: dict[int, list[int]] = {}
    for a in D.arcs:
        adj.setdefault(a.tail, []).append(a.head)
    seen = {root}
    stack = [root]
    while stack:
        for v in adj.get(stack.pop(), ()):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def min_arborescence(D: Digraph, root: int) -> Arborescence:
    """Minimum-weight ``root``-arborescence of ``D`` and a matching dual.

    Returned arc indices are positions in ``D.arcs``.  Ties between entering
    arcs of equal reduced weight go to the lowest index.
    """
    if root not in D.vertices:
        raise ValueError(f"root {root} is not a vertex")
    for i, a in enumerate(D.arcs):
        if a.weight < 0:
            raise NegativeWeight(f"arc {i} has negative weight {a.weight}")
    unreached = set(D.vertices) - _reachable(D, root)
    if unreached:
        raise Infeasible(f"vertices {sorted(unreached)} are unreachable from the root")

    members = {v: frozenset([v]) for v in D.vertices}
    arcs = [(a.tail, a.head, a.weight, i) for i, a in enumerate(D.arcs)
            if a.tail != a.head and a.head != root]
    singletons = dict.fromkeys((v for v in D.vertices if v != root), 0)
    sets: dict[frozenset[int], int] = {}
    history = []
    fresh = max(D.vertices) + 1

    while True:
        low: dict[int, int] = {}
        for _, h, w, _ in arcs:
            if h not in low or w < low[h]:
                low[h] = w
        for node, y in low.items():
            if len(members[node]) == 1:
                singletons[node] += y
            elif y:
                sets[members[node]] = sets.get(members[node], 0) + y
        arcs = [(t, h, w - low[h], i) for t, h, w, i in arcs]

        chosen: dict[int, tuple[int, int]] = {}
        for t, h, w, i in arcs:
            if w == 0 and (h not in chosen or i < chosen[h][1]):
                chosen[h] = (t, i)

        cycle = _find_cycle({h: t for h, (t, _) in chosen.items()})
        if cycle is None:
            result = {i for _, i in chosen.values()}
            break

        cset = set(cycle)
        c = fresh
        fresh += 1
        members[c] = frozenset().union(*(members[v] for v in cycle))
        entering = {i: h for t, h, _, i in arcs if h in cset and t not in cset}
        history.append((c, {v: chosen[v][1] for v in cycle}, entering))
        new_arcs = []
        for t, h, w, i in arcs:
            t2 = c if t in cset else t
            h2 = c if h in cset else h
            if t2 != h2:
                new_arcs.append((t2, h2, w, i))
        arcs = new_arcs

    for c, cycle_in, entering in reversed(history):
        e = next(i for i in result if i in entering)
        result.update(i for v, i in cycle_in.items() if v != entering[e])

    result = frozenset(result)
    weight = sum(D.arcs[i].weight for i in result)
    dual = ArborescenceDual(singletons, sets)
    assert weight == dual.value, (weight, dual)
    return Arborescence(result, weight, dual)


def _find_cycle(parent: dict[int, int]) -> list[int] | None:
    done: set[int] = set()
    for start in sorted(parent):
        path = []
        pos: dict[int, int] = {}
        v = start
        while v in parent and v not in done and v not in pos:
            pos[v] = len(path)
            path.append(v)
            v = parent[v]
        if v in pos:
            return path[pos[v]:]
        done.update(path)
    return None


class RootedBranching(NamedTuple):
    arcs: frozenset[int]
    value: int
    dual: ArborescenceDual


def min_branching_with_roots(D: Digraph, X: Iterable[int], reversed: bool = False) -> RootedBranching:
    """Minimum-weight branching of ``D`` whose root set is exactly ``X``.

    With ``reversed=True`` the same for cobranchings and their coroot sets.
    Arcs come back as ``D.labels`` entries.  Raises :class:`Infeasible` when
    ``X`` misses a source component.
    """
    if reversed:
        D = D.reversed()
    X = frozenset(X)
    if not X <= set(D.vertices):
        raise ValueError("prescribed roots must be vertices of the digraph")
    local = [k for k, a in enumerate(D.arcs) if a.head not in X]
    aux_arcs = [D.arcs[k] for k in local] + [Arc(SUPER_ROOT, v, 0) for v in sorted(X)]
    aux = Digraph((SUPER_ROOT,) + tuple(D.vertices), tuple(aux_arcs))
    try:
        arb = min_arborescence(aux, SUPER_ROOT)
    except Infeasible:
        raise Infeasible(f"root set {sorted(X)} misses a source component") from None
    picked = frozenset(D.labels[local[k]] for k in arb.arcs if k < len(local))
    return RootedBranching(picked, arb.weight, arb.dual)
