"""The cut formulation of the shortest bibranching problem and its dual.

Primal: minimise ``w.x`` subject to ``x(out(S')) >= 1`` for every nonempty
``S'`` in S, ``x(in(T')) >= 1`` for every nonempty ``T'`` in T, ``x >= 0``.
Dual: maximise ``sum y + sum z`` where every arc's load
``sum{y(S'): a leaves S'} + sum{z(T'): a enters T'}`` stays within ``w(a)``.

Everything is exact: values are :class:`fractions.Fraction`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping

from . import simplex
from .errors import InfeasibleInput, TooLarge, UnboundedDual
from .graph import Instance
from .verdict import PASS, Verdict

MAX_SWEEP = 20
MAX_SOLVE = 8

LpPrimal = Mapping[int, Fraction]


@dataclass
class LpDual:
    y: dict[frozenset[int], Fraction] = field(default_factory=dict)
    z: dict[frozenset[int], Fraction] = field(default_factory=dict)

    def __post_init__(self):
        self.y = {frozenset(k): Fraction(v) for k, v in self.y.items() if v}
        self.z = {frozenset(k): Fraction(v) for k, v in self.z.items() if v}

    @property
    def value(self) -> Fraction:
        return sum(self.y.values(), Fraction(0)) + sum(self.z.values(), Fraction(0))

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for v in (*self.y.values(), *self.z.values()))

    def load(self, inst: Instance, i: int) -> Fraction:
        u, v, _ = inst.arcs[i]
        return (sum((val for X, val in self.y.items() if u in X and v not in X), Fraction(0))
                + sum((val for X, val in self.z.items() if v in X and u not in X), Fraction(0)))


def subsets(ground) -> Iterator[frozenset[int]]:
    """Nonempty subsets of ``ground`` in increasing bitmask order over sorted elements."""
    ground = sorted(ground)
    for mask in range(1, 1 << len(ground)):
        yield frozenset(v for k, v in enumerate(ground) if mask >> k & 1)


def _x(x: LpPrimal, i: int) -> Fraction:
    return Fraction(x.get(i, 0))


def cut_value(inst: Instance, x: LpPrimal, X, dir: str) -> Fraction:
    total = Fraction(0)
    for i, (u, v, _) in enumerate(inst.arcs):
        if (dir == "out" and u in X and v not in X) or (dir == "in" and v in X and u not in X):
            total += _x(x, i)
    return total


def primal_feasible(inst: Instance, x: LpPrimal) -> Verdict:
    if max(len(inst.S), len(inst.T)) > MAX_SWEEP:
        raise TooLarge(f"subset sweep limited to sides of size {MAX_SWEEP}")
    for i in range(len(inst.arcs)):
        if _x(x, i) < 0:
            return Verdict(False, f"negative value on arc a{i + 1}", i)
    for Sp in subsets(inst.S):
        if cut_value(inst, x, Sp, "out") < 1:
            return Verdict(False, f"cut leaving {sorted(Sp)} is uncovered", ("S", Sp))
    for Tp in subsets(inst.T):
        if cut_value(inst, x, Tp, "in") < 1:
            return Verdict(False, f"cut entering {sorted(Tp)} is uncovered", ("T", Tp))
    return PASS


def dual_feasible(inst: Instance, yz: LpDual) -> Verdict:
    for side, vals in (("S", yz.y), ("T", yz.z)):
        for X, val in vals.items():
            if val < 0:
                return Verdict(False, f"negative dual value on {sorted(X)}", (side, X))
            if not X or not X <= (inst.S if side == "S" else inst.T):
                return Verdict(False, f"dual set {sorted(X)} is not a nonempty subset of {side}", (side, X))
    for i, a in enumerate(inst.arcs):
        if yz.load(inst, i) > a.weight:
            return Verdict(False, f"dual infeasible at arc a{i + 1}", i)
    return PASS


def objectives(inst: Instance, x: LpPrimal, yz: LpDual) -> tuple[Fraction, Fraction]:
    primal = sum((a.weight * _x(x, i) for i, a in enumerate(inst.arcs)), Fraction(0))
    return primal, yz.value


def comp_slack_check(inst: Instance, x: LpPrimal, yz: LpDual) -> Verdict:
    """Complementary slackness between a feasible primal and a feasible dual."""
    for verdict in (primal_feasible(inst, x), dual_feasible(inst, yz)):
        if not verdict:
            raise InfeasibleInput(verdict.reason)
    for i, a in enumerate(inst.arcs):
        if _x(x, i) > 0 and yz.load(inst, i) != a.weight:
            return Verdict(False, f"arc a{i + 1} is used but its dual constraint is slack", ("x", i))
    for Sp, val in sorted(yz.y.items(), key=lambda kv: sorted(kv[0])):
        if val > 0 and cut_value(inst, x, Sp, "out") != 1:
            return Verdict(False, f"y on {sorted(Sp)} is positive but its cut is not tight", ("y", Sp))
    for Tp, val in sorted(yz.z.items(), key=lambda kv: sorted(kv[0])):
        if val > 0 and cut_value(inst, x, Tp, "in") != 1:
            return Verdict(False, f"z on {sorted(Tp)} is positive but its cut is not tight", ("z", Tp))
    return PASS


@dataclass
class DualSolution:
    dual: LpDual
    value: Fraction
    basis_verified: bool


def dual_program(inst: Instance) -> tuple[simplex.LinearProgram, list[tuple[str, frozenset[int]]]]:
    """The dual as an explicit LP; columns are all nonempty subsets of S, then of T."""
    cols = [("S", X) for X in subsets(inst.S)] + [("T", X) for X in subsets(inst.T)]
    lp = simplex.LinearProgram([Fraction(1)] * len(cols))
    for u, v, w in inst.arcs:
        row = [int((u in X and v not in X) if side == "S" else (v in X and u not in X))
               for side, X in cols]
        lp.add(row, "<=", w)
    return lp, cols


def solve_dual_integral(inst: Instance) -> DualSolution:
    """An integral optimal dual, by exact simplex plus branch and bound.

    Raises :class:`UnboundedDual` when the primal is infeasible.
    """
    if max(len(inst.S), len(inst.T)) > MAX_SOLVE:
        raise TooLarge(f"explicit dual limited to sides of size {MAX_SOLVE}")
    lp, cols = dual_program(inst)
    res = simplex.branch_and_bound(lp)
    if res.status == "unbounded":
        raise UnboundedDual("the dual is unbounded, so no bibranching exists")
    if res.status != "optimal":
        raise RuntimeError("the dual always admits the zero solution")
    dual = LpDual({X: val for (side, X), val in zip(cols, res.x) if side == "S"},
                  {X: val for (side, X), val in zip(cols, res.x) if side == "T"})
    ok = simplex.verify_basis(res.A, res.b, res.cost, res.basis)
    return DualSolution(dual, res.value, ok)
