"""The submodular flow formulation: choose the S-T arcs, pay for them, and
pay g_S / g_T for completing both sides into a cobranching and a branching.

A flow is a ``frozenset`` of S-T arc indices.  A potential is a pair of
integer vectors ``p`` on S and ``q`` on T.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple

import numpy as np

from . import simplex
from .arborescence import min_branching_with_roots
from .errors import Infeasible, NotOptimalFlow, TooLarge
from .graph import Instance, boundary
from .mconvex import INF, GOracle, argmin_member
from .verdict import PASS, Verdict

MAX_BRUTE = 24
MAX_MASTER = 20
MAX_POTENTIAL_SIDE = 8
_CHUNK = 16


@functools.lru_cache(maxsize=256)
def oracles(inst: Instance) -> tuple[GOracle, GOracle]:
    return GOracle(inst, "S"), GOracle(inst, "T")


@dataclass
class Potential:
    p: dict[int, int]
    q: dict[int, int]

    def copy(self) -> Potential:
        return Potential(dict(self.p), dict(self.q))


def boundary_parts(inst: Instance, xi: Iterable[int]) -> tuple[dict[int, int], dict[int, int]]:
    """``(d|_S, -d|_T)`` for the boundary ``d`` of ``xi``: both nonnegative."""
    d = boundary(inst, xi)
    return {u: d[u] for u in sorted(inst.S)}, {v: -d[v] for v in sorted(inst.T)}


def msf_objective(inst: Instance, xi: Iterable[int]) -> int | float:
    xi = frozenset(xi)
    gS, gT = oracles(inst)
    out_S, in_T = boundary_parts(inst, xi)
    return inst.weight(xi) + gS.value(out_S) + gT.value(in_T)


def flow_feasible(inst: Instance, xi: Iterable[int]) -> bool:
    gS, gT = oracles(inst)
    out_S, in_T = boundary_parts(inst, xi)
    return gS.value(out_S) != INF and gT.value(in_T) != INF


class MSFSolution(NamedTuple):
    flow: frozenset[int]
    value: int


def _support_table(oracle: GOracle) -> np.ndarray:
    k = len(oracle.ground)
    table = np.empty(1 << k, dtype=float)
    for mask in range(1 << k):
        table[mask] = oracle.support_value(v for j, v in enumerate(oracle.ground) if mask >> j & 1)
    return table


def _enumerate(vals: list[int], bits: list[int], width: int) -> tuple[np.ndarray, np.ndarray]:
    """Sums of ``vals`` and ORs of ``bits`` over all subsets, indexed by mask."""
    total = np.zeros(1, dtype=np.int64)
    orred = np.zeros(1, dtype=np.int64)
    for val, bit in zip(vals[:width], bits[:width]):
        total = np.concatenate([total, total + val])
        orred = np.concatenate([orred, orred | bit])
    return total, orred


def _solve_brute(inst: Instance) -> MSFSolution:
    st = inst.arcs_ST
    k = len(st)
    if k > MAX_BRUTE:
        raise TooLarge(f"brute force limited to {MAX_BRUTE} S-T arcs")
    gS, gT = oracles(inst)
    tabS, tabT = _support_table(gS), _support_table(gT)
    posS = {v: j for j, v in enumerate(gS.ground)}
    posT = {v: j for j, v in enumerate(gT.ground)}
    w = [inst.arcs[i].weight for i in st]
    sbit = [1 << posS[inst.arcs[i].tail] for i in st]
    tbit = [1 << posT[inst.arcs[i].head] for i in st]
    low = min(k, _CHUNK)
    wl, sl = _enumerate(w, sbit, low)
    _, tl = _enumerate(w, tbit, low)
    best = (INF, None)
    for high in range(1 << (k - low)):
        hw = sum(w[low + j] for j in range(k - low) if high >> j & 1)
        hs = functools.reduce(lambda a, j: a | sbit[low + j], (j for j in range(k - low) if high >> j & 1), 0)
        ht = functools.reduce(lambda a, j: a | tbit[low + j], (j for j in range(k - low) if high >> j & 1), 0)
        vals = (wl + hw) + tabS[sl | hs] + tabT[tl | ht]
        j = int(np.argmin(vals))
        if vals[j] < best[0]:
            best = (vals[j], (high << low) | j)
    if best[0] == INF:
        raise Infeasible("no feasible flow, hence no bibranching")
    mask = best[1]
    return MSFSolution(frozenset(st[j] for j in range(k) if mask >> j & 1), int(best[0]))


# -- Benders decomposition ----------------------------------------------------

class OptimalityCut(NamedTuple):
    """``h_side(x) >= constant + sum(coeffs[a] * x[a])`` over S-T arcs."""

    side: str
    constant: int
    coeffs: dict[int, int]

    def at(self, xi: Iterable[int]) -> int:
        return self.constant + sum(self.coeffs.get(i, 0) for i in xi)


class FeasibilityCut(NamedTuple):
    """``sum(x[a] for a in arcs) >= 1``."""

    side: str
    arcs: frozenset[int]

    def satisfied(self, xi: Iterable[int]) -> bool:
        return not self.arcs.isdisjoint(xi)


def benders_cut(inst: Instance, side: str, xi: Iterable[int]) -> OptimalityCut | FeasibilityCut:
    """Cut on the subproblem value of ``side`` generated at flow ``xi``.

    The optimality cut comes from the subproblem's integral dual: the
    arborescence dual of the super-rooted auxiliary graph, one set variable
    per laminar set and one singleton per vertex.  It is tight at ``xi``.
    """
    xi = frozenset(xi)
    gS, gT = oracles(inst)
    oracle = gS if side == "S" else gT
    st = inst.arcs_ST
    end = (lambda i: inst.arcs[i].tail) if side == "S" else (lambda i: inst.arcs[i].head)
    X = frozenset(end(i) for i in xi)
    for K in oracle.source_components:
        if not K & X:
            return FeasibilityCut(side, frozenset(i for i in st if end(i) in K))
    res = min_branching_with_roots(oracle.graph, X, reversed=(side == "S"))
    sets = {frozenset([v]): val for v, val in res.dual.singletons.items() if val}
    for Y, val in res.dual.sets.items():
        sets[Y] = sets.get(Y, 0) + val
    coeffs = {}
    for i in st:
        c = -sum(val for Y, val in sets.items() if end(i) in Y)
        if c:
            coeffs[i] = c
    cut = OptimalityCut(side, sum(sets.values()), coeffs)
    assert cut.at(xi) == res.value
    return cut


@dataclass
class BendersState:
    optimality_cuts: list[OptimalityCut] = field(default_factory=list)
    feasibility_cuts: list[FeasibilityCut] = field(default_factory=list)
    incumbent: frozenset[int] | None = None
    bound: int | float | None = None
    iterations: int = 0

    @property
    def cuts(self) -> list:
        return [*self.feasibility_cuts, *self.optimality_cuts]


def benders(inst: Instance, max_iter: int = 10_000) -> BendersState:
    """Benders loop with an enumerated master; S-side cuts are generated first."""
    st = inst.arcs_ST
    k = len(st)
    if k > MAX_MASTER:
        raise TooLarge(f"enumerated master limited to {MAX_MASTER} S-T arcs")
    masks = np.arange(1 << k, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(k)) & 1).astype(np.int64)
    wvec = np.array([inst.arcs[i].weight for i in st], dtype=np.int64)
    base = bits @ wvec
    feasible = np.ones(1 << k, dtype=bool)
    theta = {"S": np.zeros(1 << k, dtype=np.int64), "T": np.zeros(1 << k, dtype=np.int64)}
    col = {i: j for j, i in enumerate(st)}
    state = BendersState()
    while state.iterations < max_iter:
        state.iterations += 1
        if not feasible.any():
            raise Infeasible("feasibility cuts exclude every flow")
        vals = np.where(feasible, base + theta["S"] + theta["T"], np.iinfo(np.int64).max)
        m = int(np.argmin(vals))
        xi = frozenset(st[j] for j in range(k) if m >> j & 1)
        state.incumbent, state.bound = xi, int(vals[m])
        added = False
        for side in ("S", "T"):
            cut = benders_cut(inst, side, xi)
            if isinstance(cut, FeasibilityCut):
                state.feasibility_cuts.append(cut)
                hit = np.zeros(k, dtype=np.int64)
                hit[[col[i] for i in cut.arcs]] = 1
                feasible &= (bits @ hit) >= 1
                added = True
            elif cut.at(xi) > theta[side][m]:
                state.optimality_cuts.append(cut)
                cvec = np.zeros(k, dtype=np.int64)
                for i, c in cut.coeffs.items():
                    cvec[col[i]] = c
                theta[side] = np.maximum(theta[side], cut.constant + bits @ cvec)
                added = True
        if not added:
            return state
    raise RuntimeError("Benders loop did not converge")


def solve_msf(inst: Instance, method: str = "brute") -> MSFSolution:
    if method == "brute":
        return _solve_brute(inst)
    if method == "benders":
        state = benders(inst)
        return MSFSolution(state.incumbent, state.bound)
    raise ValueError(f"unknown method {method!r}")


# -- optimality certificates --------------------------------------------------

def check_optimal_potential(inst: Instance, xi: Iterable[int], pot: Potential) -> Verdict:
    """Arc conditions on every S-T arc, then the S-side and T-side argmin conditions."""
    xi = frozenset(xi)
    if not flow_feasible(inst, xi):
        raise ValueError("the flow is not feasible")
    for i in inst.arcs_ST:
        u, v, w = inst.arcs[i]
        red = w + pot.p.get(u, 0) - pot.q.get(v, 0)
        if i in xi and red > 0:
            return Verdict(False, f"arc condition fails at arc a{i + 1} (used, reduced weight {red} > 0)", i)
        if i not in xi and red < 0:
            return Verdict(False, f"arc condition fails at arc a{i + 1} (unused, reduced weight {red} < 0)", i)
    gS, gT = oracles(inst)
    out_S, in_T = boundary_parts(inst, xi)
    vs = argmin_member(gS, out_S, pot.p, "-")
    if not vs:
        return Verdict(False, f"S-side argmin condition fails: {vs.reason}", vs.witness)
    vt = argmin_member(gT, in_T, pot.q, "+")
    if not vt:
        return Verdict(False, f"T-side argmin condition fails: {vt.reason}", vt.witness)
    return PASS


def potential_sign_check(inst: Instance, xi: Iterable[int], pot: Potential) -> Verdict:
    """p <= 0, q >= 0, and both vanish where the boundary magnitude is at least 2."""
    out_S, in_T = boundary_parts(inst, xi)
    for u in sorted(inst.S):
        if pot.p.get(u, 0) > 0 or (out_S[u] >= 2 and pot.p.get(u, 0) != 0):
            return Verdict(False, f"p({u}) = {pot.p.get(u, 0)} has the wrong sign or should vanish", u)
    for v in sorted(inst.T):
        if pot.q.get(v, 0) < 0 or (in_T[v] >= 2 and pot.q.get(v, 0) != 0):
            return Verdict(False, f"q({v}) = {pot.q.get(v, 0)} has the wrong sign or should vanish", v)
    return PASS


def potential_system(inst: Instance, xi: frozenset[int]):
    """Linear system whose solutions are the optimal potentials for ``xi``.

    Variables are ``-p(u)`` for u in S, then ``q(v)`` for v in T, all
    nonnegative.  The objective minimises their sum.
    """
    Sv, Tv = sorted(inst.S), sorted(inst.T)
    col = {("S", u): j for j, u in enumerate(Sv)}
    col.update({("T", v): len(Sv) + j for j, v in enumerate(Tv)})
    n = len(col)
    lp = simplex.LinearProgram([Fraction(-1)] * n)

    def row(entries):
        r = [0] * n
        for key, c in entries:
            r[col[key]] += c
        return r

    for i in inst.arcs_ST:
        u, v, w = inst.arcs[i]
        lp.add(row([(("S", u), 1), (("T", v), 1)]), ">=" if i in xi else "<=", w)
    out_S, in_T = boundary_parts(inst, xi)
    gS, gT = oracles(inst)
    for side, oracle, eta in (("S", gS, out_S), ("T", gT, in_T)):
        for x in oracle.ground:
            if eta[x] >= 2:
                lp.add(row([((side, x), 1)]), "=", 0)
        bar = frozenset(x for x in oracle.ground if eta[x] > 0)
        gbar = oracle.support_value(bar)
        for X in oracle.dom_supports():
            if X == bar:
                continue
            entries = [((side, x), 1) for x in bar] + [((side, x), -1) for x in X]
            lp.add(row(entries), "<=", oracle.support_value(X) - gbar)
    return lp, Sv, Tv


def find_optimal_potential(inst: Instance, xi: Iterable[int]) -> Potential:
    """An integral optimal potential for an optimal flow ``xi``.

    Raises :class:`NotOptimalFlow` when none exists.
    """
    xi = frozenset(xi)
    if max(len(inst.S), len(inst.T)) > MAX_POTENTIAL_SIDE:
        raise TooLarge(f"potential search limited to sides of size {MAX_POTENTIAL_SIDE}")
    if not flow_feasible(inst, xi):
        raise NotOptimalFlow("the flow is infeasible")
    lp, Sv, Tv = potential_system(inst, xi)
    res = simplex.solve(lp)
    if res.status != "optimal":
        raise NotOptimalFlow("no potential certifies this flow")

    def to_potential(vals) -> Potential:
        return Potential({u: -int(vals[j]) for j, u in enumerate(Sv)},
                         {v: int(vals[len(Sv) + j]) for j, v in enumerate(Tv)})

    frac = [j for j, v in enumerate(res.x) if v.denominator != 1]
    candidates = []
    if not frac:
        candidates.append(list(res.x))
    elif len(frac) <= 10:
        for ups in itertools.product((0, 1), repeat=len(frac)):
            vals = list(res.x)
            for j, up in zip(frac, ups):
                vals[j] = vals[j].numerator // vals[j].denominator + up
            candidates.append(vals)
    for vals in candidates:
        pot = to_potential(vals)
        if check_optimal_potential(inst, xi, pot):
            return pot
    W = sum(a.weight for a in inst.arcs)
    res = simplex.branch_and_bound(lp, upper=[W] * lp.nvars)
    if res.status != "optimal":
        raise NotOptimalFlow("no integral potential certifies this flow")
    pot = to_potential(res.x)
    verdict = check_optimal_potential(inst, xi, pot)
    if not verdict:
        raise NotOptimalFlow(verdict.reason)
    return pot
