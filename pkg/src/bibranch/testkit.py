"""Brute-force oracles and random instances.

Nothing here calls into the solvers it is used to validate; every oracle
works straight from the definitions by exhaustive enumeration.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import Infeasible, TooLarge
from .graph import Arc, Digraph, Instance

MAX_BRUTE_ARCS = 24
MAX_ENUM_ARCS = 20
_CHUNK = 16


class BruteResult(NamedTuple):
    arcs: frozenset[int]
    value: int


def brute_min_bibranching(inst: Instance) -> BruteResult:
    """Least-weight bibranching over all arc subsets, reachability definition.

    Ties go to the lexicographically least sorted tuple of arc indices.
    """
    m = len(inst.arcs)
    if m > MAX_BRUTE_ARCS:
        raise TooLarge(f"exhaustive search limited to {MAX_BRUTE_ARCS} arcs")
    s_mask = sum(1 << v for v in inst.S)
    t_mask = sum(1 << v for v in inst.T)
    w = np.array([a.weight for a in inst.arcs], dtype=np.int64)
    low = min(m, _CHUNK)
    local = np.arange(1 << low, dtype=np.int64)
    best_val = None
    best: list[tuple[int, ...]] = []
    for high in range(1 << (m - low)):
        masks = local | (high << low)
        present = [(masks >> i) & 1 for i in range(m)]
        fwd = np.full(masks.shape, s_mask, dtype=np.int64)
        bwd = np.full(masks.shape, t_mask, dtype=np.int64)
        for _ in range(inst.n):
            for i, (u, v, _) in enumerate(inst.arcs):
                fwd |= ((fwd >> u) & present[i]) << v
                bwd |= ((bwd >> v) & present[i]) << u
        ok = ((fwd & t_mask) == t_mask) & ((bwd & s_mask) == s_mask)
        if not ok.any():
            continue
        weights = np.stack(present, axis=1) @ w if m else np.zeros(masks.shape, dtype=np.int64)
        cand_val = int(weights[ok].min())
        if best_val is None or cand_val < best_val:
            best_val, best = cand_val, []
        if cand_val == best_val:
            for mask in masks[ok & (weights == cand_val)]:
                best.append(tuple(i for i in range(m) if int(mask) >> i & 1))
    if best_val is None:
        raise Infeasible("no arc subset is a bibranching")
    return BruteResult(frozenset(min(best)), best_val)


def _is_branching(vertices, arcs: Sequence[tuple[int, int]]) -> tuple[bool, frozenset[int]]:
    heads = [v for _, v in arcs]
    roots = frozenset(vertices) - set(heads)
    if len(set(heads)) != len(heads):
        return False, roots
    # acyclic iff repeatedly peeling arcs out of roots consumes them all
    reached = set(roots)
    remaining = list(arcs)
    while True:
        nxt = [(u, v) for u, v in remaining if u not in reached]
        newly = {v for u, v in remaining if u in reached}
        if not newly:
            return not nxt, roots
        reached |= newly
        remaining = nxt


def enumerate_branchings_with_roots(D: Digraph, X: Iterable[int]) -> list[frozenset[int]]:
    """Every branching of ``D`` (as local arc-index sets) whose root set is ``X``."""
    if len(D.arcs) > MAX_ENUM_ARCS:
        raise TooLarge(f"enumeration limited to {MAX_ENUM_ARCS} arcs")
    X = frozenset(X)
    out = []
    for r in range(len(D.arcs) + 1):
        for combo in itertools.combinations(range(len(D.arcs)), r):
            ok, roots = _is_branching(D.vertices, [(D.arcs[i].tail, D.arcs[i].head) for i in combo])
            if ok and roots == X:
                out.append(frozenset(combo))
    return out


class RootExchange(NamedTuple):
    B1: frozenset[int]
    B2: frozenset[int]
    t: int | None  # None when the plain transfer of s suffices


def root_exchange_search(D: Digraph, B1: Iterable[int], B2: Iterable[int], s: int) -> RootExchange | None:
    """Search every repartition of ``B1 + B2`` for branchings that move root ``s``
    from the first to the second, possibly trading back a root ``t``.

    ``D.arcs`` is the arc multiset and must be partitioned by ``B1``, ``B2``.
    Returns ``None`` when no repartition works.
    """
    B1, B2 = frozenset(B1), frozenset(B2)
    arcs = [(a.tail, a.head) for a in D.arcs]
    if B1 & B2 or B1 | B2 != frozenset(range(len(arcs))):
        raise ValueError("B1 and B2 must partition the arcs")
    ok1, R1 = _is_branching(D.vertices, [arcs[i] for i in B1])
    ok2, R2 = _is_branching(D.vertices, [arcs[i] for i in B2])
    if not (ok1 and ok2):
        raise ValueError("B1 and B2 must be branchings")
    if s not in R1 - R2:
        raise ValueError("s must be a root of B1 but not of B2")
    targets = [(R1 - {s}, R2 | {s}, None)]
    targets += [((R1 - {s}) | {t}, (R2 | {s}) - {t}, t) for t in sorted(R2 - R1)]
    for mask in range(1 << len(arcs)):
        C1 = frozenset(i for i in range(len(arcs)) if mask >> i & 1)
        C2 = frozenset(range(len(arcs))) - C1
        okc1, Q1 = _is_branching(D.vertices, [arcs[i] for i in C1])
        if not okc1:
            continue
        okc2, Q2 = _is_branching(D.vertices, [arcs[i] for i in C2])
        if not okc2:
            continue
        for want1, want2, t in targets:
            if Q1 == want1 and Q2 == want2:
                return RootExchange(C1, C2, t)
    return None


@dataclass(frozen=True)
class GenConfig:
    seed: int
    ns: int
    nt: int
    arcs: int
    wmax: int = 8
    # relative frequencies of arcs inside S, inside T, and from S to T
    dens_S: float = 1.0
    dens_T: float = 1.0
    dens_ST: float = 1.0


def gen_instance(cfg: GenConfig) -> Instance:
    if cfg.ns < 1 or cfg.nt < 1:
        raise ValueError("both sides need at least one vertex")
    if cfg.arcs < 0 or cfg.wmax < 0:
        raise ValueError("arc count and maximum weight must be nonnegative")
    rng = random.Random(cfg.seed)
    S = list(range(cfg.ns))
    T = list(range(cfg.ns, cfg.ns + cfg.nt))
    kinds, dens = [], []
    for kind, d, ok in (("S", cfg.dens_S, cfg.ns >= 2), ("T", cfg.dens_T, cfg.nt >= 2),
                        ("ST", cfg.dens_ST, True)):
        if ok and d > 0:
            kinds.append(kind)
            dens.append(d)
    if not kinds:
        raise ValueError("all arc densities are zero")
    arcs = []
    for _ in range(cfg.arcs):
        kind = rng.choices(kinds, dens)[0]
        if kind == "ST":
            u, v = rng.choice(S), rng.choice(T)
        else:
            u, v = rng.sample(S if kind == "S" else T, 2)
        arcs.append(Arc(u, v, rng.randint(0, cfg.wmax)))
    return Instance(cfg.ns + cfg.nt, frozenset(S), frozenset(T), tuple(arcs))


def random_branching(rng: random.Random, vertices: Sequence[int], p_arc: float = 0.6) -> list[tuple[int, int]]:
    """A random branching: each vertex, in random order, may hang below an earlier one."""
    order = list(vertices)
    rng.shuffle(order)
    out = []
    for k, v in enumerate(order[1:], 1):
        if rng.random() < p_arc:
            out.append((rng.choice(order[:k]), v))
    return out
