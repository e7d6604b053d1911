from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from bibranch.arborescence import SUPER_ROOT
from bibranch.bridge import (build_aux, lp_cert_from_potential, potentials_from_lp_dual, roundtrip_verify,
                             slack_arcs, tighten_potential)
from bibranch.errors import InputNotOptimal, NegativeRootWeight, NotOptimalPotential
from bibranch.graph import Arc, Instance
from bibranch.lp import LpDual, comp_slack_check, dual_feasible, objectives, primal_feasible
from bibranch.msf import Potential, check_optimal_potential, potential_sign_check
from bibranch.testkit import GenConfig, gen_instance

from conftest import A1, A2, A4, S1, S2, T1, T2

E1_DUAL = LpDual({frozenset({S1}): 1}, {frozenset({T1}): 2, frozenset({T2}): 1})
E1_POT = Potential({S1: -1, S2: 0}, {T1: 2, T2: 1})


def chi(*arcs):
    return {i: F(1) for i in arcs}


def test_lp_to_flow(e1):
    xi, pot = potentials_from_lp_dual(e1, chi(A1, A2, A4), E1_DUAL)
    assert xi == {A2} and pot == E1_POT
    with pytest.raises(InputNotOptimal):
        potentials_from_lp_dual(e1, chi(0, 1, 2, 3), E1_DUAL)


def test_lp_to_flow_zero_weights():
    inst = Instance(3, {0}, {1, 2}, [(0, 1, 0), (1, 2, 0), (0, 2, 0)])
    xi, pot = potentials_from_lp_dual(inst, chi(0, 1), LpDual())
    assert pot == Potential({0: 0}, {1: 0, 2: 0})


def test_tighten(e1, single):
    loose = Potential({S1: -1, S2: 0}, {T1: 3, T2: 1})
    assert check_optimal_potential(e1, {A2}, loose)
    assert slack_arcs(e1, {A2}, loose) == [A2]
    trace = []
    assert tighten_potential(e1, {A2}, loose, trace) == E1_POT
    assert len(trace) == 1
    assert tighten_potential(e1, {A2}, E1_POT) == E1_POT
    assert tighten_potential(single, {0}, Potential({0: 0}, {1: 4})) == Potential({0: 0}, {1: 3})
    with pytest.raises(NotOptimalPotential):
        tighten_potential(e1, {A2}, Potential({S1: -1, S2: 0}, {T1: 2, T2: 0}))


def test_build_aux(e1):
    aux = build_aux(e1, E1_POT)
    r = SUPER_ROOT
    assert set(aux.DT.arcs) == {Arc(r, T1, 2), Arc(r, T2, 1), Arc(T1, T2, 1)}
    assert set(aux.DS.arcs) == {Arc(S1, r, 1), Arc(S2, r, 0), Arc(S1, S2, 1)}
    zero = build_aux(e1, Potential({S1: 0, S2: 0}, {T1: 0, T2: 0}))
    assert all(a.weight == 0 for a in zero.DT.arcs if a.tail == r)
    with pytest.raises(NegativeRootWeight):
        build_aux(e1, Potential({S1: 1, S2: 0}, {T1: 2, T2: 1}))


def test_flow_to_lp(e1, single):
    cert = lp_cert_from_potential(e1, {A2}, E1_POT)
    assert cert.x == chi(A1, A2, A4)
    assert cert.dual == E1_DUAL
    assert objectives(e1, cert.x, cert.dual) == (4, 4)
    cert = lp_cert_from_potential(single, {0}, Potential({0: 0}, {1: 3}))
    assert cert.x == chi(0) and cert.dual == LpDual({}, {frozenset({1}): 3})
    with pytest.raises(NotOptimalPotential):
        lp_cert_from_potential(single, {0}, Potential({0: 0}, {1: 4}))


def test_flow_to_lp_zero_weights():
    inst = Instance(3, {0}, {1, 2}, [(0, 1, 0), (1, 2, 0), (0, 2, 0)])
    cert = lp_cert_from_potential(inst, {0}, Potential({0: 0}, {1: 0, 2: 0}))
    assert primal_feasible(inst, cert.x) and cert.dual == LpDual()


def test_roundtrip(e1, single, isolated_s):
    report = roundtrip_verify(e1)
    assert report.ok and set(report.values.values()) == {4}
    assert roundtrip_verify(single).ok
    report = roundtrip_verify(isolated_s)
    assert not report.ok and report.stages[0].name == "lp-solve"
    assert "Infeasible" in report.stages[0].detail


instances = st.builds(lambda seed, ns, nt, m: gen_instance(GenConfig(seed, ns, nt, m)),
                      st.integers(0, 2**64 - 1), st.integers(1, 3), st.integers(1, 3), st.integers(1, 10))


@settings(max_examples=60, deadline=None)
@given(instances)
def test_roundtrip_property(inst):
    report = roundtrip_verify(inst)
    if report.stages[0].name == "lp-solve" and not report.stages[0].ok:
        assert "Infeasible" in report.stages[0].detail
        return
    assert report.ok, report.stages


@settings(max_examples=40, deadline=None)
@given(instances, st.data())
def test_tightening_keeps_optimality_each_round(inst, data):
    from bibranch.msf import find_optimal_potential, solve_msf
    from bibranch.errors import Infeasible
    try:
        sol = solve_msf(inst)
    except Infeasible:
        return
    pot = find_optimal_potential(inst, sol.flow)
    # loosen q on used arcs where that keeps optimality, then tighten back
    bump = data.draw(st.integers(0, 3))
    for i in sorted(sol.flow):
        v = inst.arcs[i].head
        trial = pot.copy()
        trial.q[v] += bump
        if check_optimal_potential(inst, sol.flow, trial):
            pot = trial
    trace = []
    tight = tighten_potential(inst, sol.flow, pot, trace)
    assert len(trace) <= len(inst.arcs_ST)
    assert not slack_arcs(inst, sol.flow, tight)
    for step in [*trace, tight]:
        assert check_optimal_potential(inst, sol.flow, step)
        assert potential_sign_check(inst, sol.flow, step)
    cert = lp_cert_from_potential(inst, sol.flow, tight)
    assert comp_slack_check(inst, cert.x, cert.dual)
