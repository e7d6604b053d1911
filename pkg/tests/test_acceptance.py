"""Acceptance gate: one test per criterion, each recording a pass/fail line
that the terminal summary prints at the end of the run."""
import itertools
import json
import os
import random
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from bibranch import msf as msf_module
from bibranch.arborescence import min_arborescence
from bibranch.bridge import lp_cert_from_potential, potentials_from_lp_dual, slack_arcs, tighten_potential
from bibranch.cli import main
from bibranch.errors import Infeasible, UnboundedDual
from bibranch.graph import Arc, Digraph, format_instance
from bibranch.lp import comp_slack_check, dual_feasible, objectives, primal_feasible, solve_dual_integral
from bibranch.mconvex import INF, GOracle, exchange_check, oracle_function
from bibranch.msf import (FeasibilityCut, benders, boundary_parts, check_optimal_potential,
                          find_optimal_potential, oracles, potential_sign_check, solve_msf)
from bibranch.testkit import (GenConfig, brute_min_bibranching, enumerate_branchings_with_roots, gen_instance,
                              root_exchange_search, random_branching)

from conftest import record

SUITE_SIZE = 540
RUNTIME_LIMIT = 60.0


def suite1_config(seed):
    rng = random.Random(seed)
    return GenConfig(seed, rng.randint(1, 4), rng.randint(1, 4), rng.randint(1, 14), 8)


@pytest.fixture(scope="module")
def suite1():
    """Every instance with the four independently computed optimal values."""
    rows = []
    start = time.perf_counter()
    for seed in range(SUITE_SIZE):
        inst = gen_instance(suite1_config(seed))
        row = {"seed": seed, "inst": inst}
        try:
            row["brute"] = brute_min_bibranching(inst)
        except Infeasible:
            row["brute"] = None
        for method in ("brute", "benders"):
            try:
                row["msf_" + method] = solve_msf(inst, method)
            except Infeasible:
                row["msf_" + method] = None
        try:
            row["dual"] = solve_dual_integral(inst)
        except UnboundedDual:
            row["dual"] = None
        rows.append(row)
    return rows, time.perf_counter() - start


@pytest.fixture(scope="module")
def feasible(suite1):
    return [row for row in suite1[0] if row["brute"] is not None]


@pytest.fixture(scope="module")
def pipeline(feasible):
    """LP optimum to flow certificate to tight potential to LP certificate, per instance."""
    out = []
    for row in feasible:
        inst = row["inst"]
        x = {i: Fraction(1) for i in row["brute"].arcs}
        rec = {"row": row, "errors": []}
        try:
            rec["xi"], rec["pot"] = potentials_from_lp_dual(inst, x, row["dual"].dual)
        except Exception as e:  # recorded as a failure of criterion 4
            rec["errors"].append(("lp2msf", repr(e)))
            out.append(rec)
            continue
        flow = row["msf_brute"].flow
        rec["found"] = find_optimal_potential(inst, flow)
        rec["extra"] = []
        for start in (rec["found"], _loosened(inst, flow, rec["found"])):
            extra_trace = []
            try:
                rec["extra"].append((flow, tighten_potential(inst, flow, start, extra_trace), extra_trace))
            except Exception as e:
                rec["errors"].append(("tighten", repr(e)))
        trace = []
        try:
            rec["tight"] = tighten_potential(inst, rec["xi"], rec["pot"], trace)
            rec["trace"] = trace
            rec["cert"] = lp_cert_from_potential(inst, rec["xi"], rec["tight"])
        except Exception as e:
            rec["errors"].append(("msf2lp", repr(e)))
        out.append(rec)
    return out


def _loosened(inst, xi, pot):
    """Raise q on used arcs' heads as far as optimality allows (up to 3 per head)."""
    pot = pot.copy()
    for i in sorted(xi):
        v = inst.arcs[i].head
        for _ in range(3):
            trial = pot.copy()
            trial.q[v] += 1
            if not check_optimal_potential(inst, xi, trial):
                break
            pot = trial
    return pot


def test_c01_oracle_equivalence(suite1):
    rows, elapsed = suite1
    bad = []
    for row in rows:
        truth = None if row["brute"] is None else row["brute"].value
        got = [None if row[k] is None else row[k].value for k in ("msf_brute", "msf_benders", "dual")]
        if any(v != truth for v in got):
            bad.append(row["seed"])
    n_feasible = sum(row["brute"] is not None for row in rows)
    ok = len(rows) >= 500 and not bad and elapsed <= RUNTIME_LIMIT
    record(1, "oracle equivalence of brute force, flow brute force, Benders, integral dual", ok,
           f"{len(rows)} instances, {n_feasible} feasible, {len(bad)} mismatches, {elapsed:.1f}s")
    assert ok, bad[:10]


def test_c02_integral_dual_matches_primal(feasible):
    bad = [row["seed"] for row in feasible
           if not (row["dual"].dual.is_integral() and row["dual"].value == row["brute"].value
                   and row["dual"].basis_verified and dual_feasible(row["inst"], row["dual"].dual))]
    ok = not bad and feasible
    record(2, "integral optimal dual with value equal to the integral primal optimum", ok,
           f"{len(feasible)} feasible instances, {len(bad)} failures")
    assert ok, bad[:10]


def test_c03_exchange_property():
    count, bad = 0, []
    for seed in range(120):
        rng = random.Random(10_000 + seed)
        inst = gen_instance(GenConfig(10_000 + seed, rng.randint(1, 4), rng.randint(1, 4), rng.randint(1, 14)))
        for side in ("S", "T"):
            g = GOracle(inst, side)
            v = exchange_check(oracle_function(g), len(g.ground), 2)
            if not v:
                bad.append((seed, side, v.witness))
        count += 1
    ok = count >= 100 and not bad
    record(3, "exchange property of g_S and g_T on {0,1,2}^side", ok,
           f"{count} instances, {len(bad)} counterexamples")
    assert ok, bad[:5]


def test_c04_lp_to_flow_certificates(pipeline):
    bad = []
    for rec in pipeline:
        if rec["errors"] and rec["errors"][0][0] == "lp2msf":
            bad.append((rec["row"]["seed"], rec["errors"][0][1]))
        elif not check_optimal_potential(rec["row"]["inst"], rec["xi"], rec["pot"]):
            bad.append(rec["row"]["seed"])
    ok = not bad
    record(4, "potentials from an optimal LP pair certify an optimal flow", ok,
           f"{len(pipeline)} instances, {len(bad)} failures")
    assert ok, bad[:5]


def test_c05_potential_signs(pipeline):
    checked, bad = 0, []
    for rec in pipeline:
        inst = rec["row"]["inst"]
        cands = [(rec.get("xi"), rec.get("pot")), (rec["row"]["msf_brute"].flow, rec.get("found"))]
        cands += [(rec.get("xi"), p) for p in [*rec.get("trace", []), rec.get("tight")]]
        cands += [(xi, p) for xi, tight, trace in rec.get("extra", []) for p in [*trace, tight]]
        for xi, pot in cands:
            if pot is None:
                continue
            checked += 1
            if not potential_sign_check(inst, xi, pot):
                bad.append(rec["row"]["seed"])
    ok = not bad and checked
    record(5, "every produced potential has p <= 0, q >= 0 and vanishes at boundary >= 2", ok,
           f"{checked} potentials, {len(bad)} failures")
    assert ok, bad[:5]


def test_c06_tightening(pipeline):
    bad, rounds, runs = [], 0, 0
    for rec in pipeline:
        inst = rec["row"]["inst"]
        if "tight" not in rec or any(kind == "tighten" for kind, _ in rec["errors"]):
            bad.append((rec["row"]["seed"], rec["errors"]))
            continue
        for xi, tight, trace in [(rec["xi"], rec["tight"], rec["trace"]), *rec["extra"]]:
            runs += 1
            rounds = max(rounds, len(trace))
            if (len(trace) > len(inst.arcs_ST) or slack_arcs(inst, xi, tight)
                    or not all(check_optimal_potential(inst, xi, p) for p in [*trace, tight])):
                bad.append(rec["row"]["seed"])
    ok = not bad
    record(6, "tightening terminates within |A[S,T]| rounds, tight and optimal at every round", ok,
           f"{runs} runs, max {rounds} rounds, {len(bad)} failures")
    assert ok, bad[:5]


def test_c07_flow_to_lp_certificates(pipeline):
    bad = []
    for rec in pipeline:
        inst = rec["row"]["inst"]
        if "cert" not in rec:
            bad.append((rec["row"]["seed"], rec["errors"]))
            continue
        x, yz = rec["cert"]
        pv, dv = objectives(inst, x, yz)
        if not (primal_feasible(inst, x) and dual_feasible(inst, yz) and comp_slack_check(inst, x, yz)
                and pv == dv == rec["row"]["brute"].value):
            bad.append(rec["row"]["seed"])
    ok = not bad
    record(7, "LP certificate from a tight potential is feasible, complementary, value-equal", ok,
           f"{len(pipeline)} instances, {len(bad)} failures")
    assert ok, bad[:5]


def _arborescence_problems(D, root, arb):
    problems = []
    found = enumerate_branchings_with_roots(D, {root})
    if arb.weight != min(sum(D.arcs[i].weight for i in B) for B in found):
        problems.append("weight")
    dual = arb.dual
    if dual.value != arb.weight:
        problems.append("objective")
    values = [*dual.singletons.values(), *dual.sets.values()]
    if any(not isinstance(v, int) or v < 0 for v in values):
        problems.append("integral/nonnegative")
    sets = list(dual.sets)
    if any(X & Y and not (X <= Y or Y <= X) for X, Y in itertools.combinations(sets, 2)):
        problems.append("laminar")
    for v in D.vertices:
        if v != root and dual.singletons.get(v) != min(a.weight for a in D.arcs if a.head == v):
            problems.append("singleton")
    for k, a in enumerate(D.arcs):
        if a.head != root and (dual.load(a) > a.weight or (k in arb.arcs and dual.load(a) != a.weight)):
            problems.append("feasibility/slackness")
    return problems


def test_c08_edmonds_against_enumeration():
    count, bad = 0, []
    rng = random.Random(8)
    while count < 220:
        n = rng.randint(2, 6)
        arcs = [Arc(*rng.sample(range(n), 2), rng.randint(0, 9)) for _ in range(rng.randint(n - 1, 10))]
        D = Digraph(tuple(range(n)), tuple(arcs))
        if not enumerate_branchings_with_roots(D, {0}):
            continue
        count += 1
        problems = _arborescence_problems(D, 0, min_arborescence(D, 0))
        if problems:
            bad.append((D, problems))
    ok = not bad
    record(8, "Edmonds weight matches enumeration, dual integral, feasible, laminar, tight", ok,
           f"{count} rooted digraphs, {len(bad)} failures")
    assert ok, bad[:3]


def test_c09_branching_exchange():
    count, misses = 0, []
    rng = random.Random(9)
    while count < 220:
        V = list(range(rng.randint(2, 5)))
        B1, B2 = random_branching(rng, V), random_branching(rng, V)
        R1 = set(V) - {v for _, v in B1}
        R2 = set(V) - {v for _, v in B2}
        if not R1 - R2:
            continue
        s = rng.choice(sorted(R1 - R2))
        D = Digraph(tuple(V), tuple(Arc(u, v, 0) for u, v in B1 + B2))
        count += 1
        if root_exchange_search(D, range(len(B1)), range(len(B1), len(B1) + len(B2)), s) is None:
            misses.append((B1, B2, s))
    ok = not misses
    record(9, "branching root exchange always found", ok, f"{count} triples, {len(misses)} not found")
    assert ok, misses[:3]


def test_c10_benders_cuts(suite1, monkeypatch):
    emitted = []
    original = msf_module.benders_cut

    def spy(inst, side, xi):
        cut = original(inst, side, xi)
        emitted.append((side, frozenset(xi), cut))
        return cut

    monkeypatch.setattr(msf_module, "benders_cut", spy)
    bad, n_cuts, terminated = [], 0, 0
    for row in suite1[0]:
        inst = row["inst"]
        emitted.clear()
        try:
            benders(inst)
            terminated += 1
        except Infeasible:
            terminated += 1
        st = inst.arcs_ST
        k = len(st)
        bits = (np.arange(1 << k)[:, None] >> np.arange(k)) & 1
        flows = [frozenset(st[j] for j in range(k) if m >> j & 1) for m in range(1 << k)]
        gS, gT = oracles(inst)
        h = {}
        for side, g in (("S", gS), ("T", gT)):
            h[side] = np.array([g.value(boundary_parts(inst, xi)[0 if side == "S" else 1]) for xi in flows])
        for side, xi, cut in emitted:
            n_cuts += 1
            if isinstance(cut, FeasibilityCut):
                hit = bits[:, [st.index(i) for i in cut.arcs]].sum(axis=1) >= 1
                if not np.all(np.isinf(h[side][~hit])) or h[side][flows.index(xi)] != INF:
                    bad.append((row["seed"], side, cut))
                continue
            coeff = np.array([cut.coeffs.get(i, 0) for i in st])
            vals = cut.constant + bits @ coeff
            if np.any(vals > h[side]) or cut.at(xi) != h[side][flows.index(xi)]:
                bad.append((row["seed"], side, cut))
    ok = not bad and terminated == len(suite1[0])
    record(10, "Benders cuts valid at every flow, tight where generated; loop terminates", ok,
           f"{terminated} runs, {n_cuts} cuts, {len(bad)} invalid")
    assert ok, bad[:3]


def test_c11_cli_round_trip(tmp_path, capsys):
    failures = []
    for seed in range(25):
        rng = random.Random(seed)
        base = tmp_path / f"i{seed}"
        inst_path = f"{base}.txt"
        args = ["--ns", str(rng.randint(1, 3)), "--nt", str(rng.randint(1, 3)), "--arcs", str(rng.randint(2, 12))]
        main(["gen", "--seed", str(seed), *args, "-o", inst_path])
        code = main(["solve", "-i", inst_path, "--certify", "-o", f"{base}.cert"])
        if code == 2:
            continue
        if code != 0 or main(["verify", "-i", inst_path, "-c", f"{base}.cert"]) != 0:
            failures.append((seed, "solve/verify"))
            continue
        doc = json.loads(open(f"{base}.cert").read())
        for direction, keep in (("lp2msf", ("primal_x", "dual_y", "dual_z")),
                                ("msf2lp", ("flow_xi", "potential_p", "potential_q"))):
            part = {k: doc[k] for k in keep}
            with open(f"{base}.{direction}.in", "w") as fh:
                json.dump(part, fh)
            code = main(["translate", "-i", inst_path, "-c", f"{base}.{direction}.in",
                         "--direction", direction, "-o", f"{base}.{direction}.out"])
            if code != 0 or main(["verify", "-i", inst_path, "-c", f"{base}.{direction}.out"]) != 0:
                failures.append((seed, direction))
    capsys.readouterr()
    # byte determinism across separate processes with different hash seeds
    outputs = []
    for hash_seed in ("1", "2"):
        env = dict(os.environ, PYTHONHASHSEED=hash_seed)
        run = []
        for seed in range(3):
            inst_path = tmp_path / f"i{seed}.txt"
            cert_path = tmp_path / f"det{seed}-{hash_seed}.json"
            subprocess.run([sys.executable, "-m", "bibranch", "solve", "-i", str(inst_path), "--method", "benders",
                            "--certify", "-o", str(cert_path)], env=env, capture_output=True, check=False)
            run.append(cert_path.read_bytes() if cert_path.exists() else b"")
        outputs.append(run)
    deterministic = outputs[0] == outputs[1]
    ok = not failures and deterministic
    record(11, "CLI gen, solve --certify, verify, translate both ways; deterministic bytes", ok,
           f"{len(failures)} failures, deterministic={deterministic}")
    assert ok, failures
