"""Instances, cut operators and the branching / bibranching predicates.

Vertices are dense integers ``0..n-1``; an arc is identified by its
position in ``Instance.arcs``.  Arc subsets are plain ``frozenset``s of
arc indices and integer vectors are ``dict``s keyed by vertex.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import networkx as nx

from .errors import InstanceError

MAX_WEIGHT = 2**31


class Arc(NamedTuple):
    tail: int
    head: int
    weight: int


@dataclass(frozen=True)
class Digraph:
    """A weighted digraph on an explicit vertex set.

    ``labels[i]`` is the identity of ``arcs[i]`` in whatever larger object
    the digraph was cut out of (the instance arc index for ``D[S]``/``D[T]``).
    """

    vertices: tuple[int, ...]
    arcs: tuple[Arc, ...]
    labels: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.labels is None:
            object.__setattr__(self, "labels", tuple(range(len(self.arcs))))

    def reversed(self) -> Digraph:
        return Digraph(self.vertices,
                       tuple(Arc(a.head, a.tail, a.weight) for a in self.arcs),
                       self.labels)


@dataclass(frozen=True)
class Instance:
    n: int
    S: frozenset[int]
    T: frozenset[int]
    arcs: tuple[Arc, ...]

    def __post_init__(self):
        object.__setattr__(self, "S", frozenset(self.S))
        object.__setattr__(self, "T", frozenset(self.T))
        object.__setattr__(self, "arcs", tuple(Arc(*a) for a in self.arcs))
        if not self.S or not self.T:
            raise InstanceError("S and T must both be nonempty")
        if self.S & self.T:
            raise InstanceError("S and T must be disjoint")
        if self.S | self.T != frozenset(range(self.n)):
            raise InstanceError("S and T must partition the vertex set 0..n-1")
        for i, (u, v, w) in enumerate(self.arcs):
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise InstanceError(f"arc a{i + 1} has an endpoint outside 0..{self.n - 1}")
            if u == v:
                raise InstanceError(f"arc a{i + 1} is a self-loop")
            if u in self.T and v in self.S:
                raise InstanceError(f"arc a{i + 1} goes from T to S")
            if not isinstance(w, int) or not 0 <= w < MAX_WEIGHT:
                raise InstanceError(f"arc a{i + 1} has invalid weight {w!r}")

    @property
    def vertices(self) -> range:
        return range(self.n)

    @property
    def arcs_S(self) -> tuple[int, ...]:
        return tuple(i for i, a in enumerate(self.arcs) if a.head in self.S)

    @property
    def arcs_T(self) -> tuple[int, ...]:
        return tuple(i for i, a in enumerate(self.arcs) if a.tail in self.T)

    @property
    def arcs_ST(self) -> tuple[int, ...]:
        return tuple(i for i, a in enumerate(self.arcs)
                     if a.tail in self.S and a.head in self.T)

    def weight(self, B: Iterable[int]) -> int:
        return sum(self.arcs[i].weight for i in B)

    def induced(self, side: str) -> Digraph:
        """``D[S]`` or ``D[T]``, arcs labelled by their instance index."""
        part = self.S if side == "S" else self.T
        idx = self.arcs_S if side == "S" else self.arcs_T
        return Digraph(tuple(sorted(part)), tuple(self.arcs[i] for i in idx), idx)

    def as_digraph(self) -> Digraph:
        return Digraph(tuple(self.vertices), self.arcs)


def cut_arcs(inst: Instance | Digraph, X: Iterable[int], dir: str = "out") -> frozenset[int]:
    """Indices of arcs leaving (``dir="out"``) or entering (``"in"``) ``X``."""
    X = frozenset(X)
    if dir == "out":
        return frozenset(i for i, a in enumerate(inst.arcs) if a.tail in X and a.head not in X)
    if dir == "in":
        return frozenset(i for i, a in enumerate(inst.arcs) if a.head in X and a.tail not in X)
    raise ValueError(f"dir must be 'out' or 'in', not {dir!r}")


def boundary(inst: Instance, xi: Iterable[int]) -> dict[int, int]:
    """Net out-degree of every vertex in the S-T arc set ``xi``."""
    st = set(inst.arcs_ST)
    d = dict.fromkeys(inst.vertices, 0)
    for i in xi:
        if i not in st:
            raise ValueError(f"arc a{i + 1} is not an S-T arc")
        u, v, _ = inst.arcs[i]
        d[u] += 1
        d[v] -= 1
    return d


def source_components(D: Instance | Digraph) -> list[frozenset[int]]:
    """Strong components that no arc enters, ordered by least vertex."""
    G = nx.DiGraph()
    G.add_nodes_from(D.vertices)
    G.add_edges_from((a.tail, a.head) for a in D.arcs)
    cond = nx.condensation(G)
    comps = [frozenset(cond.nodes[c]["members"]) for c in cond if cond.in_degree(c) == 0]
    return sorted(comps, key=min)


class BranchingInfo(NamedTuple):
    is_branching: bool
    roots: frozenset[int]


def classify_branching(D: Instance | Digraph, B: Iterable[int]) -> BranchingInfo:
    """Branching test plus the root set R(B) of vertices no arc of B enters."""
    B = list(B)
    indeg: dict[int, int] = {}
    parent = {}
    for i in B:
        a = D.arcs[i]
        indeg[a.head] = indeg.get(a.head, 0) + 1
        parent[a.head] = a.tail
    roots = frozenset(v for v in D.vertices if v not in indeg)
    if any(k > 1 for k in indeg.values()):
        return BranchingInfo(False, roots)
    # in-degree <= 1, so a cycle exists iff following parents never hits a root
    for v in parent:
        seen = set()
        while v in parent:
            if v in seen:
                return BranchingInfo(False, roots)
            seen.add(v)
            v = parent[v]
    return BranchingInfo(True, roots)


def classify_cobranching(D: Instance | Digraph, B: Iterable[int]) -> BranchingInfo:
    """Mirror of :func:`classify_branching`; ``roots`` is R*(B)."""
    if isinstance(D, Instance):
        D = D.as_digraph()
    return classify_branching(D.reversed(), B)


def _closure(n_adj: dict[int, list[int]], start: Iterable[int]) -> set[int]:
    seen = set(start)
    stack = list(seen)
    while stack:
        u = stack.pop()
        for v in n_adj.get(u, ()):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def is_bibranching(inst: Instance, B: Iterable[int]) -> bool:
    """Every S-vertex reaches T and every T-vertex is reachable from S in (V, B)."""
    fwd: dict[int, list[int]] = {}
    bwd: dict[int, list[int]] = {}
    for i in B:
        u, v, _ = inst.arcs[i]
        fwd.setdefault(u, []).append(v)
        bwd.setdefault(v, []).append(u)
    return inst.T <= _closure(fwd, inst.S) and inst.S <= _closure(bwd, inst.T)


def is_structured_bibranching(inst: Instance, B: Iterable[int]) -> bool:
    """B[S] a cobranching and B[T] a branching whose (co)roots are exactly
    the tails / heads of B[S,T]."""
    B = frozenset(B)
    tails = {inst.arcs[i].tail for i in B if i in inst.arcs_ST}
    heads = {inst.arcs[i].head for i in B if i in inst.arcs_ST}
    DS, DT = inst.induced("S"), inst.induced("T")
    local_S = [k for k, lab in enumerate(DS.labels) if lab in B]
    local_T = [k for k, lab in enumerate(DT.labels) if lab in B]
    co = classify_cobranching(DS, local_S)
    br = classify_branching(DT, local_T)
    return co.is_branching and br.is_branching and co.roots == tails and br.roots == heads


# -- instance text format ----------------------------------------------------

def parse_instance(text: str) -> Instance:
    header = None
    S: list[int] = []
    T: list[int] = []
    arcs: list[Arc] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if tok[0] == "p":
                if header is not None or len(tok) != 4 or tok[1] != "bibranch":
                    raise InstanceError("expected a single 'p bibranch <n> <m>' line")
                header = (_nat(tok[2]), _nat(tok[3]))
            elif header is None:
                raise InstanceError("the 'p' line must come first")
            elif tok[0] == "s":
                S.extend(_nat(t) for t in tok[1:])
            elif tok[0] == "t":
                T.extend(_nat(t) for t in tok[1:])
            elif tok[0] == "a":
                if len(tok) != 4:
                    raise InstanceError("arc lines are 'a <tail> <head> <weight>'")
                arcs.append(Arc(_nat(tok[1]), _nat(tok[2]), _nat(tok[3])))
            else:
                raise InstanceError(f"unknown line type {tok[0]!r}")
        except InstanceError as e:
            raise InstanceError(f"line {lineno}: {e}") from None
    if header is None:
        raise InstanceError("missing 'p bibranch <n> <m>' line")
    n, m = header
    if len(arcs) != m:
        raise InstanceError(f"header announces {m} arcs, found {len(arcs)}")
    if len(set(S)) != len(S) or len(set(T)) != len(T):
        raise InstanceError("repeated vertex in s/t lines")
    return Instance(n, frozenset(S), frozenset(T), tuple(arcs))


def _nat(tok: str) -> int:
    if not re.fullmatch(r"\d+", tok):
        raise InstanceError(f"expected a nonnegative integer, got {tok!r}")
    return int(tok)


def format_instance(inst: Instance) -> str:
    """Canonical text form; also the input to the certificate digest."""
    lines = [f"p bibranch {inst.n} {len(inst.arcs)}",
             "s " + " ".join(map(str, sorted(inst.S))),
             "t " + " ".join(map(str, sorted(inst.T)))]
    lines += [f"a {u} {v} {w}" for u, v, w in inst.arcs]
    return "\n".join(lines) + "\n"
