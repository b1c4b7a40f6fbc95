"""Summation of the gap function over the regions of a Markoff map.

Regions are enumerated branch by branch (see :mod:`markoff.growth`).  A
priority queue always refines the branch with the largest certified tail
bound, and the run stops once the bounds of all unexplored branches add up
to less than the tolerance.  Terms are accumulated with ``math.fsum`` so the
result does not depend on the refinement order.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

from .branch_kernel import (
    DomainError,
    canonicalize,
    edge_psi,
    frak_h,
    frak_h_hat,
    h,
    in_real_interval,
    mod_distance,
    nu_of_mu,
)
from .farey_tree import INF, ONE, ZERO, Region, other_region
from .growth import TermBound, branch_tail
from .markoff_engine import MarkoffMap

TYPE_PRESERVING_EPS = 1e-12


class NotConverged(RuntimeError):
    def __init__(self, message: str, report: "IdentityReport"):
        super().__init__(message)
        self.report = report


@dataclass
class IdentityReport:
    mu: complex
    nu: complex
    partial_sum: complex
    target: complex
    regions: int
    tail_bound: float
    converged: bool
    mode: str  # "gap" sums the gap function mod 2 pi i, "h" sums h(x) exactly
    extra: dict = field(default_factory=dict)

    @property
    def residue(self) -> complex:
        return canonicalize(self.partial_sum) if self.mode == "gap" else self.partial_sum

    @property
    def error(self) -> float:
        if self.mode == "gap":
            return mod_distance(self.partial_sum, self.target)
        return abs(self.partial_sum - self.target)

    def to_json(self) -> dict:
        r = self.residue
        out = {
            "mu": [self.mu.real, self.mu.imag],
            "nu": [self.nu.real, self.nu.imag],
            "sum_re": self.partial_sum.real,
            "sum_im": self.partial_sum.imag,
            "residue_re": r.real,
            "residue_im": r.imag,
            "target": [self.target.real, self.target.imag],
            "error": self.error,
            "regions": self.regions,
            "tail_bound": self.tail_bound,
            "converged": self.converged,
            "mode": self.mode,
        }
        out.update(self.extra)
        return out


def is_type_preserving(mu: complex) -> bool:
    """tau = mu - 2 = -2, where the gap function vanishes identically."""
    return abs(mu) <= TYPE_PRESERVING_EPS


def _check_value(x: complex, mu: complex, where: Region) -> None:
    if x == 0 or in_real_interval(x):
        raise DomainError(f"value {x} at {where} lies in [-2, 2]")
    if abs(x * x - mu) <= 1e-12 * max(1.0, abs(mu)):
        raise DomainError(f"value {x} at {where} squares to mu")


def fsum_complex(terms) -> complex:
    terms = list(terms)
    return complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))


@dataclass(order=True)
class _Item:
    key: tuple
    A: Region = field(compare=False)
    B: Region = field(compare=False)
    C: Region = field(compare=False)
    a: complex = field(compare=False)
    b: complex = field(compare=False)
    c: complex = field(compare=False)
    bound: float = field(compare=False)


class BranchSummer:
    """Sum of ``term`` over finitely many fixed regions plus whole branches."""

    def __init__(self, mu: complex, mode: str, term=None):
        self.mu = complex(mu)
        self.nu = nu_of_mu(self.mu)
        self.mode = mode
        self.tb = TermBound(mode, self.nu)
        if term is None:
            tau = self.mu - 2.0
            term = h if mode == "h" else (lambda x: frak_h(tau, x))
        self.term = term
        self.terms: list[tuple[tuple, complex]] = []
        self.heap: list[_Item] = []
        self.regions = 0

    def add_region(self, X: Region, x: complex) -> None:
        _check_value(x, self.mu, X)
        self.terms.append((X.sort_key(), self.term(x)))
        self.regions += 1

    def add_branch(self, A: Region, B: Region, C: Region, a: complex, b: complex, c: complex) -> float:
        bound = branch_tail(a, b, c, self.tb)
        D = other_region(A, B, C)
        # Largest bound first; slope order breaks ties deterministically.
        heapq.heappush(self.heap, _Item((-bound, D.sort_key()), A, B, C, a, b, c, bound))
        return bound

    def _remaining(self) -> float:
        return math.fsum(it.bound for it in self.heap)

    def run(self, tol: float, budget: int) -> tuple[complex, float, bool]:
        remaining = self._remaining()
        steps = 0
        while self.heap and self.regions < budget and not remaining < tol:
            it = heapq.heappop(self.heap)
            D = other_region(it.A, it.B, it.C)
            d = it.a * it.b - it.c
            self.add_region(D, d)
            b1 = self.add_branch(it.A, D, it.B, it.a, d, it.b)
            b2 = self.add_branch(D, it.B, it.A, d, it.b, it.a)
            steps += 1
            if math.isinf(remaining) or steps % 1024 == 0:
                remaining = self._remaining()
            else:
                remaining += b1 + b2 - it.bound
                if remaining < tol:
                    remaining = self._remaining()
        remaining = self._remaining()
        self.terms.sort(key=lambda kv: kv[0])
        return fsum_complex(t for _, t in self.terms), remaining, remaining < tol


def _whole_tree(summer: BranchSummer, m: MarkoffMap) -> None:
    x, y, z = m.seed.as_tuple()
    for R, v in ((INF, x), (ZERO, y), (ONE, z)):
        summer.add_region(R, v)
    summer.add_branch(ZERO, ONE, INF, y, z, x)
    summer.add_branch(ONE, INF, ZERO, z, x, y)
    summer.add_branch(INF, ZERO, ONE, x, y, z)


def mcshane_sum(m: MarkoffMap, tol: float = 1e-8, budget: int = 1_000_000, strict: bool = False) -> IdentityReport:
    """Sum of the gap function over every region of ``m``.

    The target is nu modulo 2 pi i.  At tau = -2 the gap function vanishes
    identically, so the sum of h(x) is evaluated instead, with target 1/2.
    """
    mu = m.mu
    mode = "h" if is_type_preserving(mu) else "gap"
    summer = BranchSummer(mu, mode)
    _whole_tree(summer, m)
    total, tail, ok = summer.run(tol, budget)
    target = complex(0.5) if mode == "h" else summer.nu
    rep = IdentityReport(mu, summer.nu, total, target, summer.regions, tail, ok, mode)
    if strict and not ok:
        raise NotConverged(f"tail bound {tail:.3g} above tolerance after {summer.regions} regions", rep)
    return rep


def edge_weight(m: MarkoffMap, X: Region, Y: Region, head: Region) -> complex:
    """psi of the edge X n Y directed toward ``head``."""
    x, y, z = m(X), m(Y), m(head)
    return edge_psi(x, y, z, m.mu)


def branch_sum(
    m: MarkoffMap,
    X: Region,
    Y: Region,
    head: Region,
    tol: float = 1e-8,
    budget: int = 1_000_000,
) -> IdentityReport:
    """Half-gaps on the coasts plus gaps over the branch behind the edge.

    For the edge X n Y directed toward ``head`` the sum runs over X, Y (with
    the half gap) and over every region on the far side from ``head``.  The
    target is the edge weight psi mod 2 pi i.  At tau = -2 the derivative
    identity h(x) + h(y) + 2 * (sum of h behind the edge) = z / (xy) is used
    instead, which holds without any 2 pi i ambiguity.
    """
    mu = m.mu
    x, y, z = m(X), m(Y), m(head)
    if is_type_preserving(mu):
        summer = BranchSummer(mu, "h", term=lambda v: 2.0 * h(v))
        tail_term = h
        target = z / (x * y)
    else:
        summer = BranchSummer(mu, "gap")
        tail_term = lambda v: frak_h_hat(mu, v)
        target = edge_psi(x, y, z, mu)
    for R, v in ((X, x), (Y, y)):
        _check_value(v, mu, R)
        summer.terms.append((R.sort_key(), tail_term(v)))
        summer.regions += 1
    summer.add_branch(X, Y, head, x, y, z)
    # In h mode the branch terms carry a factor 2 that the bound does not see.
    scale = 2.0 if summer.mode == "h" else 1.0
    total, tail, _ = summer.run(tol / scale, budget)
    tail *= scale
    ok = tail < tol
    return IdentityReport(mu, summer.nu, total, target, summer.regions, tail, ok, summer.mode)


def circular_set_sum(m: MarkoffMap, n: int) -> complex:
    """Sum of edge weights over the edges at distance n from the base vertex, directed inward."""
    mu = m.mu
    x, y, z = m.seed.as_tuple()
    front = [(ZERO, ONE, INF, y, z, x), (ONE, INF, ZERO, z, x, y), (INF, ZERO, ONE, x, y, z)]
    for _ in range(n):
        nxt = []
        for A, B, C, a, b, c in front:
            D = other_region(A, B, C)
            d = a * b - c
            nxt.append((A, D, B, a, d, b))
            nxt.append((D, B, A, d, b, a))
        front = nxt
    return fsum_complex(edge_psi(a, b, c, mu) for _, _, _, a, b, c in front)
