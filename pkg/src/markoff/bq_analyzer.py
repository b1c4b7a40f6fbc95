"""Certification of the Bowditch conditions through the attracting subtree T(t).

The search never relies on a depth cut-off.  Every region outside the
three base regions lies in one of three branches, and a branch is dropped
only when :func:`markoff.growth.branch_floor` certifies that all of its
values exceed the current threshold.  A finite search is therefore a proof,
and running out of budget is reported as inconclusive.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .branch_kernel import H_bound, in_real_interval, lam
from .farey_tree import INF, ONE, ZERO, DirectedEdge, Region, fibonacci, other_region, slope
from .growth import branch_floor
from .markoff_engine import MarkoffMap, descend

SQRT_MU_RTOL = 1e-9


class BudgetExceeded(RuntimeError):
    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class _Witness(Exception):
    def __init__(self, reason: str, region: Region, value: complex):
        self.reason, self.region, self.value = reason, region, value


def _edge_key(X: Region, Y: Region) -> tuple[Region, Region]:
    return tuple(sorted((X, Y), key=lambda s: s.sort_key()))


def _scan(
    m: MarkoffMap,
    k: float,
    budget: int,
    watch: bool,
    regions: list[Region] | None = None,
    branches: list[tuple[Region, Region, Region]] | None = None,
) -> tuple[dict[Region, complex], int, float]:
    """Regions with |value| <= k; with ``watch`` abort on a BQ witness.

    The search covers ``regions`` plus every region of the listed branches
    (default: the whole tree).  Returns (regions found, branches expanded,
    smallest modulus seen).
    """
    mu = m.mu
    sq = abs(mu) ** 0.5
    found: dict[Region, complex] = {}
    low = math.inf

    def visit(R: Region, v: complex) -> None:
        nonlocal low
        low = min(low, abs(v))
        if watch:
            if in_real_interval(v):
                raise _Witness("value_in_[-2,2]", R, v)
            if abs(v * v - mu) <= SQRT_MU_RTOL * max(1.0, abs(mu)):
                raise _Witness("value_squared_is_mu", R, v)
        if abs(v) <= k:
            found[R] = v

    if regions is None:
        regions = [INF, ZERO, ONE]
        branches = [(ZERO, ONE, INF), (ONE, INF, ZERO), (INF, ZERO, ONE)]
    for R in regions:
        visit(R, m(R))
    stack = [(A, B, C, m(A), m(B), m(C)) for A, B, C in branches or []]
    used = 0
    while stack:
        A, B, C, a, b, c = stack.pop()
        # A value equal to +-sqrt(mu) can only sit where |value| = sqrt|mu|.
        floor = branch_floor(a, b, c)
        if floor > k and (not watch or floor > sq * (1 + 1e-6)):
            continue
        used += 1
        if used > budget:
            raise BudgetExceeded(f"region search for k={k} exceeded budget {budget}", (found, used, low))
        D = other_region(A, B, C)
        d = a * b - c
        visit(D, d)
        stack.append((A, D, B, a, d, b))
        stack.append((D, B, A, d, b, a))
    return found, used, low


def omega_k(m: MarkoffMap, k: float, budget: int = 100_000) -> dict[Region, complex]:
    """All regions X with |phi(X)| <= k, certified complete."""
    return _scan(m, k, budget, watch=False)[0]


def _neighbour_window(m: MarkoffMap, X: Region, bound: float, budget: int) -> list[Region]:
    """Neighbours Y of X with |phi(Y)| <= bound, certified by the closed form of y_n."""
    x = m(X)
    lm = lam(x)
    la = abs(lm)
    if la <= 1.0 + 1e-12:
        raise BudgetExceeded(f"neighbours of {X} do not grow")
    start = _some_neighbour(X)
    step = (X.p, X.q)
    out = []
    for direction in (1, -1):
        y0 = m(start)
        Y1 = slope(start.p + direction * step[0], start.q + direction * step[1])
        y1 = m(Y1)
        P = (y1 - y0 / lm) / (lm - 1.0 / lm)
        Q = y0 - P
        if abs(P) == 0.0:
            raise BudgetExceeded(f"neighbours of {X} decay in one direction")
        # |y_n| >= |P| la^n - |Q| exceeds the bound once n >= n_stop.
        n_stop = max(0, math.ceil(math.log((bound + abs(Q)) / abs(P)) / math.log(la)) + 1)
        if n_stop > budget:
            raise BudgetExceeded(f"neighbour window at {X} too long")
        for n in range(0 if direction == 1 else 1, n_stop + 1):
            Y = slope(start.p + direction * n * step[0], start.q + direction * n * step[1])
            if abs(m(Y)) <= bound:
                out.append(Y)
    return out


def _some_neighbour(X: Region) -> Region:
    """A Farey neighbour r/s of X = p/q, with p s - q r = 1."""
    p, q = X
    if q == 0:
        return ZERO
    if q == 1:
        return slope(p - 1, 1)
    s = pow(p % q, -1, q)
    return slope((p * s - 1) // q, s)


@dataclass
class AttractingTree:
    t: float
    edges: set = field(default_factory=set)
    regions: dict = field(default_factory=dict)

    def circular_boundary(self) -> list[DirectedEdge]:
        """Edges next to the tree but not in it, directed away from it."""
        from .farey_tree import edge_quad

        out = []
        for X, Y in sorted(self.edges, key=lambda e: (e[0].sort_key(), e[1].sort_key())):
            for W in edge_quad(X, Y):
                for P, opp in ((X, Y), (Y, X)):
                    if _edge_key(P, W) not in self.edges:
                        out.append(DirectedEdge.away_from(P, W, opp))
        return out


def build_tree(m: MarkoffMap, t: float = 2.0, budget: int = 100_000) -> AttractingTree:
    """Edges X n Y with |x| <= 2 + t and |y| <= H(x) + t."""
    small = omega_k(m, 2.0 + t, budget)
    tree = AttractingTree(t, set(), dict(small))
    for X, x in small.items():
        bound = H_bound(m.mu, x) + t
        if math.isinf(bound):
            raise BudgetExceeded(f"H is infinite at {X}; the tree is infinite", tree)
        for Y in _neighbour_window(m, X, bound, budget):
            tree.edges.add(_edge_key(X, Y))
            tree.regions.setdefault(Y, m(Y))
        if len(tree.edges) > budget:
            raise BudgetExceeded("tree exceeded budget", tree)
    return tree


@dataclass
class BqVerdict:
    status: str  # "Satisfied", "Violated", "Inconclusive"
    t: float
    tree_edges: int = 0
    reason: str | None = None
    witness: Region | None = None
    witness_value: complex | None = None
    min_abs_value: float = math.inf
    budget_used: int = 0

    @property
    def exit_code(self) -> int:
        return {"Satisfied": 0, "Violated": 2, "Inconclusive": 3}[self.status]

    def to_json(self) -> dict:
        out = {
            "status": self.status,
            "t": self.t,
            "tree_edges": self.tree_edges,
            "min_abs_value": self.min_abs_value,
            "budget_used": self.budget_used,
        }
        if self.reason:
            out["reason"] = self.reason
        if self.witness is not None:
            v = self.witness_value
            out["witness"] = {"slope": str(self.witness), "re": v.real, "im": v.imag}
        return out


def check_bq_part(m: MarkoffMap, regions, branches, t: float = 2.0, budget: int = 100_000) -> BqVerdict:
    """BQ test restricted to ``regions`` and the listed branches.

    Used for maps invariant under a mapping class, where only a fundamental
    set of regions is meaningful: the regions with |value| <= 2 + t there
    must be finite in number and none may lie in [-2, 2] or square to mu.
    """
    try:
        found, used, low = _scan(m, 2.0 + t, budget, True, list(regions), list(branches))
    except _Witness as w:
        return BqVerdict("Violated", t, reason=w.reason, witness=w.region, witness_value=w.value, min_abs_value=abs(w.value))
    except BudgetExceeded as e:
        _, used, low = e.partial
        return BqVerdict("Inconclusive", t, reason=str(e), min_abs_value=low, budget_used=used)
    return BqVerdict("Satisfied", t, tree_edges=len(found), min_abs_value=low, budget_used=used)


def check_bq(m: MarkoffMap, t: float = 2.0, budget: int = 100_000) -> BqVerdict:
    try:
        _, used, low = _scan(m, 2.0 + t, budget, watch=True)
    except _Witness as w:
        return BqVerdict("Violated", t, reason=w.reason, witness=w.region, witness_value=w.value, min_abs_value=abs(w.value))
    except BudgetExceeded as e:
        _, used, low = e.partial
        return BqVerdict("Inconclusive", t, reason=str(e), min_abs_value=low, budget_used=used)
    try:
        tree = build_tree(m, t, budget)
    except BudgetExceeded as e:
        return BqVerdict("Inconclusive", t, reason=str(e), min_abs_value=low, budget_used=used)
    return BqVerdict("Satisfied", t, tree_edges=len(tree.edges), min_abs_value=low, budget_used=used)


def estimate_m(m: MarkoffMap, samples: int = 32, seed: int = 0, walk: int = 12) -> float:
    """Empirical min of |phi| over sinks reached from random vertices (diagnostic only)."""
    rng = random.Random(seed)
    best = math.inf
    for _ in range(samples):
        A, B, C = INF, ZERO, ONE
        for _ in range(rng.randrange(walk)):
            D = other_region(A, B, C)
            A, B, C = (A, D, B) if rng.random() < 0.5 else (D, B, A)
        res = descend(m, (A, B, C), budget=10_000)
        best = min(best, min(abs(m(R)) for R in res.vertex))
    return best


# -- Fibonacci growth --------------------------------------------------------


@dataclass
class FibonacciReport:
    edge: tuple
    depth: int
    vertices: int = 0
    upper_violations: list = field(default_factory=list)
    lower_checked: int = 0
    lower_violations: list = field(default_factory=list)
    m: float | None = None
    min_upper_slack: float = math.inf
    min_lower_slack: float = math.inf

    def to_json(self) -> dict:
        return {
            "edge": [str(s) for s in self.edge],
            "depth": self.depth,
            "vertices": self.vertices,
            "upper_violations": len(self.upper_violations),
            "lower_checked": self.lower_checked,
            "lower_violations": len(self.lower_violations),
            "m": self.m,
        }


def _logp(v: float) -> float:
    return math.log(v) if v > 1.0 else 0.0


def fibonacci_report(m: MarkoffMap, edge: tuple[Region, Region] = (INF, ZERO), depth: int = 8) -> FibonacciReport:
    """Check the universal upper inequality and the lower Fibonacci bound near ``edge``.

    Upper: log+|z| <= log 4 + log+|mu| + log+|x| + log+|y| at every vertex
    within ``depth`` of the edge, in all three rotations.  Lower: when both
    coasts exceed 2 in modulus, log|phi(X)| >= (m - log 2) F_e(X) on the
    coasts and on the side the arrow points away from, with m the smaller
    log-modulus of the coasts.
    """
    X, Y = edge
    rep = FibonacciReport((X, Y), depth)
    lmu = _logp(abs(m.mu))
    from .farey_tree import edge_quad

    P, Q = edge_quad(X, Y)
    x, y = m(X), m(Y)
    # The growing side is the one whose first region has the larger modulus.
    grow = P if abs(m(P)) >= abs(m(Q)) else Q
    back = other_region(X, Y, grow)

    def check_vertex(a: complex, b: complex, c: complex, where) -> None:
        rep.vertices += 1
        va, vb, vc = abs(a), abs(b), abs(c)
        for p, q, r in ((va, vb, vc), (vb, vc, va), (vc, va, vb)):
            slack = math.log(4.0) + lmu + _logp(p) + _logp(q) - _logp(r)
            rep.min_upper_slack = min(rep.min_upper_slack, slack)
            if slack < -1e-9:
                rep.upper_violations.append(where)

    lower_ok = abs(x) > 2.0 and abs(y) > 2.0 and abs(m(back)) <= abs(m(grow))
    if lower_ok:
        rep.m = min(math.log(abs(x)), math.log(abs(y)))

    def check_lower(R: Region, v: complex) -> None:
        if rep.m is None:
            return
        rep.lower_checked += 1
        slack = math.log(abs(v)) - (rep.m - math.log(2.0)) * fibonacci((X, Y), R)
        rep.min_lower_slack = min(rep.min_lower_slack, slack)
        if slack < -1e-9:
            rep.lower_violations.append(R)

    check_lower(X, x)
    check_lower(Y, y)
    # Walk both sides; the lower bound is only claimed on the growing side.
    for far, near, claim in ((grow, back, True), (back, grow, False)):
        stack = [(X, Y, near, x, y, m(near), 0)]
        while stack:
            A, B, C, a, b, c, dd = stack.pop()
            D = other_region(A, B, C)
            d = a * b - c
            check_vertex(a, b, d, (A, B, D))
            if claim:
                check_lower(D, d)
            if dd + 1 < depth:
                stack.append((A, D, B, a, d, b, dd + 1))
                stack.append((D, B, A, d, b, a, dd + 1))
    return rep
