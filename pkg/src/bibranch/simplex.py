"""Two-phase tableau simplex over exact rationals, Bland's rule throughout.

Problems are stated as ``maximize c.x`` subject to rows ``(coeffs, sense,
rhs)`` with sense one of ``"<="``, ``">="``, ``"="`` and ``x >= 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

Row = tuple[Sequence, str, object]


@dataclass
class LinearProgram:
    c: list[Fraction]
    rows: list[Row] = field(default_factory=list)

    @property
    def nvars(self) -> int:
        return len(self.c)

    def add(self, coeffs, sense, rhs):
        self.rows.append((list(coeffs), sense, rhs))


@dataclass
class LPResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    x: list[Fraction] | None = None
    value: Fraction | None = None
    basis: list[int] | None = None
    # equality-form data the basis refers to: A y = b, y >= 0, maximize c.y
    A: list[list[Fraction]] | None = None
    b: list[Fraction] | None = None
    cost: list[Fraction] | None = None


def _standard_form(lp: LinearProgram):
    n = lp.nvars
    rows = []
    for coeffs, sense, rhs in lp.rows:
        coeffs = [Fraction(a) for a in coeffs]
        rhs = Fraction(rhs)
        if sense not in ("<=", ">=", "="):
            raise ValueError(f"unknown sense {sense!r}")
        if rhs < 0:
            coeffs = [-a for a in coeffs]
            rhs = -rhs
            sense = {"<=": ">=", ">=": "<=", "=": "="}[sense]
        rows.append((coeffs, sense, rhs))
    nslack = sum(1 for _, s, _ in rows if s != "=")
    A, b, basis = [], [], []
    art = []
    k = n
    for coeffs, sense, rhs in rows:
        A.append(coeffs + [Fraction(0)] * nslack)
        b.append(rhs)
        if sense != "=":
            A[-1][k] = Fraction(1 if sense == "<=" else -1)
            if sense == "<=":
                basis.append(k)
            else:
                basis.append(None)
            k += 1
        else:
            basis.append(None)
    ntot = n + nslack
    for i, bi in enumerate(basis):
        if bi is None:
            art.append(i)
    nart = len(art)
    for row in A:
        row.extend([Fraction(0)] * nart)
    for j, i in enumerate(art):
        A[i][ntot + j] = Fraction(1)
        basis[i] = ntot + j
    return A, b, basis, ntot, nart


class _Tableau:
    def __init__(self, A, b, basis, cost):
        self.rows = [row[:] + [bi] for row, bi in zip(A, b)]
        self.basis = list(basis)
        self.set_cost(cost)

    def set_cost(self, cost):
        ncol = len(self.rows[0]) - 1 if self.rows else len(cost)
        red = [Fraction(c) for c in cost] + [Fraction(0)]
        for i, bi in enumerate(self.basis):
            cb = red[bi]
            if cb:
                red = [r - cb * t for r, t in zip(red, self.rows[i])]
        self.red = red[:ncol + 1]

    def pivot(self, i, j):
        row = self.rows[i]
        p = row[j]
        row = [t / p for t in row]
        self.rows[i] = row
        for k, other in enumerate(self.rows):
            if k != i and other[j]:
                f = other[j]
                self.rows[k] = [a - f * b for a, b in zip(other, row)]
        if self.red[j]:
            f = self.red[j]
            self.red = [a - f * b for a, b in zip(self.red, row)]
        self.basis[i] = j

    def run(self, allowed):
        """Bland's rule.  Returns False on unboundedness."""
        while True:
            j = next((j for j in allowed if self.red[j] > 0), None)
            if j is None:
                return True
            best = None
            for i, row in enumerate(self.rows):
                if row[j] > 0:
                    ratio = row[-1] / row[j]
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return False
            self.pivot(best[1], j)

    def value(self):
        return -self.red[-1]


def solve(lp: LinearProgram) -> LPResult:
    A, b, basis, ntot, nart = _standard_form(lp)
    n = lp.nvars
    c = [Fraction(x) for x in lp.c] + [Fraction(0)] * (ntot - n)
    if not A:
        if any(x > 0 for x in c):
            return LPResult("unbounded")
        return LPResult("optimal", [Fraction(0)] * n, Fraction(0), [], [], [], c)

    tab = _Tableau(A, b, basis, [Fraction(0)] * ntot + [Fraction(-1)] * nart)
    if nart:
        tab.run(range(ntot + nart))
        if tab.value() < 0:
            return LPResult("infeasible")
        # drive artificials out; rows that cannot be pivoted are redundant
        for i in reversed(range(len(tab.rows))):
            if tab.basis[i] >= ntot:
                j = next((j for j in range(ntot) if tab.rows[i][j] != 0), None)
                if j is None:
                    del tab.rows[i]
                    del tab.basis[i]
                    del A[i]
                    del b[i]
                else:
                    tab.pivot(i, j)
        tab.rows = [row[:ntot] + row[-1:] for row in tab.rows]
        A = [row[:ntot] for row in A]
    tab.set_cost(c)
    if not tab.run(range(ntot)):
        return LPResult("unbounded")
    y = [Fraction(0)] * ntot
    for i, bi in enumerate(tab.basis):
        y[bi] = tab.rows[i][-1]
    return LPResult("optimal", y[:n], tab.value(), list(tab.basis), A, b, c)


def _solve_square(M, rhs):
    """Exact Gauss-Jordan solve of ``M z = rhs``; None if singular."""
    m = len(M)
    aug = [list(map(Fraction, row)) + [Fraction(r)] for row, r in zip(M, rhs)]
    for col in range(m):
        piv = next((r for r in range(col, m) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [t / p for t in aug[col]]
        for r in range(m):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [row[-1] for row in aug]


def verify_basis(A, b, cost, basis) -> bool:
    """Recompute primal and dual values of ``basis`` from scratch and check
    primal feasibility and nonpositive reduced costs."""
    m = len(A)
    if len(basis) != m or len(set(basis)) != m:
        return False
    if m == 0:
        return all(c <= 0 for c in cost)
    B = [[A[i][j] for j in basis] for i in range(m)]
    xb = _solve_square(B, b)
    if xb is None or any(v < 0 for v in xb):
        return False
    Bt = [[B[i][k] for i in range(m)] for k in range(m)]
    lam = _solve_square(Bt, [cost[j] for j in basis])
    if lam is None:
        return False
    for j in range(len(cost)):
        if cost[j] - sum(lam[i] * A[i][j] for i in range(m)) > 0:
            return False
    return True


def branch_and_bound(lp: LinearProgram, upper: Sequence | None = None) -> LPResult:
    """Integral optimum of ``lp`` by depth-first branch and bound.

    Branches on the fractional variable of largest denominator (lowest index
    on ties); nodes whose relaxation cannot beat the incumbent are pruned.
    ``upper`` optionally bounds each variable from above.
    """
    n = lp.nvars
    base = list(lp.rows)
    if upper is not None:
        for j, ub in enumerate(upper):
            if ub is not None:
                base.append(([int(k == j) for k in range(n)], "<=", ub))
    best: LPResult | None = None
    root_value = None
    stack: list[list[Row]] = [[]]
    while stack:
        extra = stack.pop()
        res = solve(LinearProgram(lp.c, base + extra))
        if res.status == "unbounded":
            return res
        if res.status != "optimal":
            continue
        if root_value is None:
            root_value = res.value
        if best is not None and res.value <= best.value:
            continue
        frac = [j for j, v in enumerate(res.x) if v.denominator != 1]
        if not frac:
            best = res
            if best.value == root_value:
                break
            continue
        j = max(frac, key=lambda k: (res.x[k].denominator, -k))
        v = res.x[j]
        unit = [int(k == j) for k in range(n)]
        floor = v.numerator // v.denominator
        # depth first, the ">=" child is explored first
        stack.append(extra + [(unit, "<=", floor)])
        stack.append(extra + [(unit, ">=", floor + 1)])
    if best is None:
        return LPResult("infeasible")
    return best
