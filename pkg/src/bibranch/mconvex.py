"""Evaluation oracles for the boundary cost functions g_S and g_T.

``g_T(eta)`` is the least weight of a branching of D[T] whose root set is
exactly the positive support of ``eta``; ``g_S`` is the same for
cobranchings of D[S] and their coroot sets.  Both are M-natural-convex,
which :func:`exchange_check` can confirm by brute force on small boxes.
"""
from __future__ import annotations

import itertools
import math
from typing import Callable, Iterable, Mapping, Sequence

from .arborescence import min_branching_with_roots
from .errors import BoxTooLarge, GroundTooLarge
from .graph import Instance, source_components
from .verdict import PASS, Verdict

INF = math.inf
MAX_GROUND = 20
MAX_BOX_POINTS = 4096


def _sign(sign) -> int:
    if sign in ("+", 1):
        return 1
    if sign in ("-", -1):
        return -1
    raise ValueError(f"sign must be '+' or '-', not {sign!r}")


class GOracle:
    """g_S (``side="S"``) or g_T (``side="T"``) for one instance.

    Values are memoised by support set, which is all they depend on.
    """

    def __init__(self, inst: Instance, side: str):
        if side not in ("S", "T"):
            raise ValueError("side must be 'S' or 'T'")
        self.inst = inst
        self.side = side
        self.ground = tuple(sorted(inst.S if side == "S" else inst.T))
        self.graph = inst.induced(side)
        # g_S works on cobranchings: reverse once so both sides are branchings
        self._forward = self.graph.reversed() if side == "S" else self.graph
        self.source_components = source_components(self._forward)
        self._cache: dict[frozenset[int], int | float] = {}

    def in_dom_support(self, X: Iterable[int]) -> bool:
        X = frozenset(X)
        return all(K & X for K in self.source_components)

    def support_value(self, X: Iterable[int]) -> int | float:
        X = frozenset(X)
        if X not in self._cache:
            if not self.in_dom_support(X):
                self._cache[X] = INF
            else:
                self._cache[X] = min_branching_with_roots(self._forward, X).value
        return self._cache[X]

    def value(self, eta: Mapping[int, int]) -> int | float:
        if any(eta.get(v, 0) < 0 for v in self.ground):
            return INF
        return self.support_value(v for v in self.ground if eta.get(v, 0) > 0)

    def shifted(self, eta: Mapping[int, int], shift: Mapping[int, int], sign="+") -> int | float:
        base = self.value(eta)
        if base == INF:
            return INF
        return base + _sign(sign) * sum(shift.get(v, 0) * eta.get(v, 0) for v in self.ground)

    def dom_supports(self) -> list[frozenset[int]]:
        """All X with chi_X in dom, in increasing bitmask order."""
        if len(self.ground) > MAX_GROUND:
            raise GroundTooLarge(f"ground set of size {len(self.ground)} exceeds {MAX_GROUND}")
        out = []
        for mask in range(1, 1 << len(self.ground)):
            X = frozenset(v for k, v in enumerate(self.ground) if mask >> k & 1)
            if self.in_dom_support(X):
                out.append(X)
        return out


def g_value(oracle: GOracle, eta: Mapping[int, int]) -> int | float:
    return oracle.value(eta)


def shifted_value(oracle: GOracle, eta: Mapping[int, int], shift: Mapping[int, int], sign="+"):
    return oracle.shifted(eta, shift, sign)


def argmin_member(oracle: GOracle, eta_bar: Mapping[int, int], shift: Mapping[int, int],
                  sign="+") -> Verdict:
    """Decide whether ``eta_bar`` minimises ``g + sign * <shift, .>`` over all integer vectors.

    Since g depends only on the support, the question reduces to three
    finite checks: every effective coefficient is nonnegative, coefficients
    vanish where ``eta_bar`` exceeds 1, and no 0-1 vector in the domain does
    better than the indicator of ``eta_bar``'s support.  A failing check
    returns a strictly better vector as witness.
    """
    ground = oracle.ground
    if len(ground) > MAX_GROUND:
        raise GroundTooLarge(f"ground set of size {len(ground)} exceeds {MAX_GROUND}")
    s = _sign(sign)
    coef = {v: s * shift.get(v, 0) for v in ground}

    def f(vec):
        return oracle.shifted(vec, shift, sign)

    current = f(eta_bar)
    full = dict.fromkeys(ground, 1)
    if current == INF:
        return Verdict(False, "not in the effective domain", full)

    for v in ground:
        if coef[v] < 0:
            # f(full + k chi_v) = f(full) + k coef[v] drops without bound
            k = max(0, (f(full) - current) // -coef[v] + 1)
            witness = dict(full)
            witness[v] += k
            return Verdict(False, f"negative coefficient at {v}", witness)

    for v in ground:
        if eta_bar.get(v, 0) >= 2 and coef[v] != 0:
            witness = dict(eta_bar)
            witness[v] -= 1
            return Verdict(False, f"nonzero coefficient at {v} where entry >= 2", witness)

    for X in oracle.dom_supports():
        cand = {v: int(v in X) for v in ground}
        if f(cand) < current:
            return Verdict(False, "a 0-1 vector does better", cand)
    return PASS


def exchange_check(f: Callable[[tuple[int, ...]], int | float], dim: int, radius: int) -> Verdict:
    """Brute-force check of the M-natural exchange property on ``{0..radius}^dim``.

    ``f`` takes a tuple of length ``dim`` and returns an integer or ``INF``.
    The witness of a failure is ``(eta, zeta, u)`` with ``u`` a coordinate index.
    Every vector the property refers to stays inside the box.
    """
    if (radius + 1) ** dim > MAX_BOX_POINTS:
        raise BoxTooLarge(f"box {{0..{radius}}}^{dim} has more than {MAX_BOX_POINTS} points")
    box = list(itertools.product(range(radius + 1), repeat=dim))
    val = {x: f(x) for x in box}
    dom = [x for x in box if val[x] != INF]

    def moved(x, u, du, v=None, dv=0):
        y = list(x)
        y[u] += du
        if v is not None:
            y[v] += dv
        return tuple(y)

    for eta in dom:
        for zeta in dom:
            total = val[eta] + val[zeta]
            plus = [u for u in range(dim) if eta[u] > zeta[u]]
            minus = [v for v in range(dim) if eta[v] < zeta[v]]
            for u in plus:
                if val[moved(eta, u, -1)] + val[moved(zeta, u, 1)] <= total:
                    continue
                if any(val[moved(eta, u, -1, v, 1)] + val[moved(zeta, u, 1, v, -1)] <= total
                       for v in minus):
                    continue
                return Verdict(False, "exchange fails", (eta, zeta, u))
    return PASS


def oracle_function(oracle: GOracle) -> Callable[[Sequence[int]], int | float]:
    """Adapt an oracle to the tuple-in interface of :func:`exchange_check`."""
    return lambda vec: oracle.value(dict(zip(oracle.ground, vec)))
