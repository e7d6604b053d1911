"""Translating optimality certificates between the LP and the flow formulation.

LP -> flow: the flow is the S-T part of the primal, and the potentials are
the dual values accumulated over the sets containing each vertex
(negated on the S side).

Flow -> LP: first make the potential tight on every used arc, then solve
one arborescence problem per side on an auxiliary graph whose root arcs
are priced by the potential; the arborescence duals are the LP duals.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, NamedTuple

from .arborescence import SUPER_ROOT, ArborescenceDual, min_arborescence, min_branching_with_roots
from .errors import (Infeasible, InputNotOptimal, NegativeRootWeight, NotOptimalPotential,
                     UnboundedDual)
from .graph import Arc, Digraph, Instance
from .lp import LpDual, comp_slack_check, dual_feasible, objectives, primal_feasible, solve_dual_integral
from .msf import Potential, check_optimal_potential, msf_objective, potential_sign_check
from .verdict import Verdict


def potentials_from_lp_dual(inst: Instance, x, yz: LpDual) -> tuple[frozenset[int], Potential]:
    """Flow and potential from an integral optimal primal/dual pair."""
    xi = frozenset(i for i in inst.arcs_ST if x.get(i, 0) == 1)
    p, q = {}, {}
    for u in sorted(inst.S):
        p[u] = -sum((val for X, val in yz.y.items() if u in X), Fraction(0))
    for v in sorted(inst.T):
        q[v] = sum((val for X, val in yz.z.items() if v in X), Fraction(0))
    if any(val.denominator != 1 for val in (*p.values(), *q.values())):
        raise InputNotOptimal("the dual is not integral")
    pot = Potential({u: int(val) for u, val in p.items()}, {v: int(val) for v, val in q.items()})
    try:
        verdict = check_optimal_potential(inst, xi, pot)
    except ValueError as e:
        raise InputNotOptimal(str(e)) from None
    if not verdict:
        raise InputNotOptimal(verdict.reason)
    return xi, pot


def slack_arcs(inst: Instance, xi: Iterable[int], pot: Potential) -> list[int]:
    """Used S-T arcs whose reduced weight is not yet zero, ascending."""
    xi = frozenset(xi)
    return [i for i in inst.arcs_ST if i in xi
            and inst.arcs[i].weight + pot.p.get(inst.arcs[i].tail, 0) - pot.q.get(inst.arcs[i].head, 0) != 0]


def tighten_potential(inst: Instance, xi: Iterable[int], pot: Potential,
                      trace: list | None = None) -> Potential:
    """Make the reduced weight zero on every used arc while staying optimal.

    Each round fixes the lowest-indexed slack arc ``uv`` by setting
    ``q(v) = max(0, w + p(u))`` and ``p(u) = q(v) - w``.  Intermediate
    potentials are appended to ``trace`` when given.
    """
    xi = frozenset(xi)
    verdict = check_optimal_potential(inst, xi, pot)
    if not verdict:
        raise NotOptimalPotential(verdict.reason)
    pot = pot.copy()
    for _ in range(len(inst.arcs_ST) + 1):
        slack = slack_arcs(inst, xi, pot)
        if not slack:
            return pot
        u, v, w = inst.arcs[slack[0]]
        beta = max(0, w + pot.p[u])
        pot.p[u], pot.q[v] = beta - w, beta
        verdict = check_optimal_potential(inst, xi, pot)
        if not verdict:
            raise NotOptimalPotential(f"tightening broke optimality: {verdict.reason}")
        if trace is not None:
            trace.append(pot.copy())
    raise NotOptimalPotential("tightening did not terminate")


class AuxPair(NamedTuple):
    """Auxiliary rooted graphs; ``DS`` is stored with arcs pointing to its root."""

    DT: Digraph
    DS: Digraph

    @property
    def root(self) -> int:
        return SUPER_ROOT


def build_aux(inst: Instance, pot: Potential) -> AuxPair:
    for u in sorted(inst.S):
        if pot.p.get(u, 0) > 0:
            raise NegativeRootWeight(f"p({u}) = {pot.p[u]} > 0 gives a negative root-arc weight")
    for v in sorted(inst.T):
        if pot.q.get(v, 0) < 0:
            raise NegativeRootWeight(f"q({v}) = {pot.q[v]} < 0 gives a negative root-arc weight")
    Tv, Sv = sorted(inst.T), sorted(inst.S)
    DT = Digraph((SUPER_ROOT, *Tv),
                 tuple(Arc(SUPER_ROOT, v, pot.q.get(v, 0)) for v in Tv)
                 + tuple(inst.arcs[i] for i in inst.arcs_T),
                 (None,) * len(Tv) + inst.arcs_T)
    DS = Digraph((SUPER_ROOT, *Sv),
                 tuple(Arc(u, SUPER_ROOT, -pot.p.get(u, 0)) for u in Sv)
                 + tuple(inst.arcs[i] for i in inst.arcs_S),
                 (None,) * len(Sv) + inst.arcs_S)
    return AuxPair(DT, DS)


def _as_sets(dual: ArborescenceDual) -> dict[frozenset[int], int]:
    out = {frozenset([v]): val for v, val in dual.singletons.items() if val}
    for X, val in dual.sets.items():
        out[X] = out.get(X, 0) + val
    return out


class LpCertificate(NamedTuple):
    x: dict[int, Fraction]
    dual: LpDual


def lp_cert_from_potential(inst: Instance, xi: Iterable[int], pot: Potential) -> LpCertificate:
    """Optimal primal and dual LP solutions from a tight optimal potential."""
    xi = frozenset(xi)
    if slack_arcs(inst, xi, pot):
        raise NotOptimalPotential("the potential is not tight on every used arc")
    verdict = check_optimal_potential(inst, xi, pot)
    if not verdict:
        raise NotOptimalPotential(verdict.reason)
    aux = build_aux(inst, pot)
    heads = frozenset(inst.arcs[i].head for i in xi)
    tails = frozenset(inst.arcs[i].tail for i in xi)

    # duals come from the unrestricted auxiliary problems; the primal parts
    # must have the prescribed root sets and, by optimality, equal weight
    arb_T = min_arborescence(aux.DT, SUPER_ROOT)
    arb_S = min_arborescence(aux.DS.reversed(), SUPER_ROOT)
    try:
        B_T = min_branching_with_roots(inst.induced("T"), heads)
        B_S = min_branching_with_roots(inst.induced("S"), tails, reversed=True)
    except Infeasible as e:
        raise NotOptimalPotential(f"flow boundary cannot be completed: {e}") from None
    if B_T.value + sum(pot.q[v] for v in heads) != arb_T.weight:
        raise NotOptimalPotential("no minimum-weight T-side arborescence has the flow's root set")
    if B_S.value - sum(pot.p[u] for u in tails) != arb_S.weight:
        raise NotOptimalPotential("no minimum-weight S-side arborescence has the flow's coroot set")

    x = {i: Fraction(1) for i in sorted(xi | B_S.arcs | B_T.arcs)}
    dual = LpDual(_as_sets(arb_S.dual), _as_sets(arb_T.dual))
    for check in (primal_feasible(inst, x), dual_feasible(inst, dual), comp_slack_check(inst, x, dual)):
        if not check:
            raise NotOptimalPotential(f"constructed LP certificate fails: {check.reason}")
    return LpCertificate(x, dual)


class Stage(NamedTuple):
    name: str
    ok: bool
    detail: str = ""


class RoundtripReport(NamedTuple):
    stages: list[Stage]
    values: dict[str, object]

    @property
    def ok(self) -> bool:
        return all(s.ok for s in self.stages)


def roundtrip_verify(inst: Instance) -> RoundtripReport:
    """LP optimum -> flow certificate -> tightened potential -> LP certificate."""
    from .testkit import brute_min_bibranching

    stages: list[Stage] = []
    values: dict[str, object] = {}

    def stage(name, verdict: Verdict | bool, detail=""):
        ok = bool(verdict)
        if not ok and isinstance(verdict, Verdict):
            detail = verdict.reason
        stages.append(Stage(name, ok, detail))
        return ok

    try:
        brute = brute_min_bibranching(inst)
        sol = solve_dual_integral(inst)
    except (Infeasible, UnboundedDual) as e:
        stage("lp-solve", False, f"Infeasible: {e}")
        return RoundtripReport(stages, values)
    x = {i: Fraction(1) for i in brute.arcs}
    values["primal"] = brute.value
    values["dual"] = sol.value
    if not stage("lp-solve", sol.value == brute.value and sol.dual.is_integral(),
                 f"dual {sol.value} vs primal {brute.value}"):
        return RoundtripReport(stages, values)
    try:
        xi, pot = potentials_from_lp_dual(inst, x, sol.dual)
        stage("lp-to-flow", True)
        values["msf"] = msf_objective(inst, xi)
        stage("flow-value", values["msf"] == brute.value, f"flow objective {values['msf']}")
        stage("potential-signs", potential_sign_check(inst, xi, pot))
        tight = tighten_potential(inst, xi, pot)
        stage("tighten", not slack_arcs(inst, xi, tight))
        cert = lp_cert_from_potential(inst, xi, tight)
        pv, dv = objectives(inst, cert.x, cert.dual)
        values["primal*"], values["dual*"] = pv, dv
        stage("flow-to-lp", pv == dv == brute.value, f"primal {pv}, dual {dv}")
    except (InputNotOptimal, NotOptimalPotential) as e:
        stage(type(e).__name__, False, str(e))
    return RoundtripReport(stages, values)
