"""Certified growth estimates on branches of the tree.

A branch (A, B; C) is the subtree beyond the edge A n B on the side away
from C.  Its first region is D with d = ab - c; its children are (A, D; B)
and (D, B; A).  Every region of the tree other than the three base regions
lies in exactly one of the branches (Y, Z; X), (Z, X; Y), (X, Y; Z).

Two estimates are used.

Branch estimate.  If |a|, |b| > 2 and |c| <= |d|, then |d| >= |a||b|/2 and
the same hypotheses hold for both children.  With u = |value|/2 this gives
u >= u_a^i u_b^j on the region of Stern-Brocot coordinates (i, j), so every
value in the branch is at least |a||b|/2.

Ray estimate.  Along a coast A with |lambda(a)| > 1 the neighbours in the
branch are y_k = P lambda^k + Q lambda^-k with y_0 = c, y_1 = b.  Once
|P||lambda|^2 >= 2|Q|, each y_k (k >= 1) has modulus at least
G_k = |P||lambda|^k / 2, and the sub-branches (Y_k, Y_k+1; A) satisfy the
branch hypotheses as soon as G_1 > 2 and G_1 G_2 >= 2|a|.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .branch_kernel import lam, in_real_interval


def branch_ok(a: complex, b: complex, c: complex) -> bool:
    return abs(a) > 2.0 and abs(b) > 2.0 and abs(c) <= abs(a * b - c)


@dataclass(frozen=True)
class Ray:
    lam_abs: float
    P_abs: float
    G1: float
    G2: float
    coast_abs: float


def ray(a: complex, b: complex, c: complex) -> Ray | None:
    """Ray data along the coast with value ``a``, first neighbours c then b."""
    if abs(a) < 1e-300 or in_real_interval(a):
        return None
    lm = lam(a)
    la = abs(lm)
    if la <= 1.0 + 1e-12:
        return None
    P = (b - c / lm) / (lm - 1.0 / lm)
    Q = c - P
    Pa = abs(P)
    if Pa * la * la < 2.0 * abs(Q):
        return None
    G1 = 0.5 * Pa * la
    G2 = G1 * la
    if G1 <= 2.0 or G1 * G2 < 2.0 * abs(a):
        return None
    return Ray(la, Pa, G1, G2, abs(a))


def branch_floor(a: complex, b: complex, c: complex) -> float:
    """A certified lower bound for |value| over every region in the branch, or 0."""
    best = 0.0
    if branch_ok(a, b, c):
        best = abs(a) * abs(b) / 2.0
    for coast, other in ((a, b), (b, a)):
        r = ray(coast, other, c)
        if r is not None:
            best = max(best, min(r.G2, r.G1 * r.G2 / 2.0))
    return best


class TermBound:
    """Bound |term(x)| <= g(|x|) with r^2 g(r) non-increasing in r.

    ``mode`` is ``"gap"`` for the gap function with parameter nu, where
    g(r) = 2s/(1-s), s = |sinh nu| / (t^2 - |cosh nu|), t + 1/t = r;
    or ``"h"`` for h(x), where g(r) = 1/(t^2 - 1).
    """

    def __init__(self, mode: str, nu: complex = 0j):
        if mode not in ("gap", "h"):
            raise ValueError(mode)
        self.mode = mode
        self.sh = abs(cmath.sinh(nu))
        self.ch = abs(cmath.cosh(nu))

    def g(self, r: float) -> float:
        if r <= 2.0:
            return math.inf
        t = 0.5 * (r + math.sqrt(r * r - 4.0))
        t2 = t * t
        if self.mode == "h":
            return 1.0 / (t2 - 1.0) if t2 > 1.0 else math.inf
        if t2 <= self.ch + self.sh:
            return math.inf
        s = self.sh / (t2 - self.ch)
        return 2.0 * s / (1.0 - s)

    def K(self, r: float) -> float:
        gv = self.g(r)
        return math.inf if math.isinf(gv) else r * r * gv


def _geom(p: float) -> float:
    return p / (1.0 - p) if p < 1.0 else math.inf


def branch_tail(a: complex, b: complex, c: complex, tb: TermBound) -> float:
    """Certified bound for the sum of |term| over the whole branch (A, B; C)."""
    best = math.inf
    if branch_ok(a, b, c):
        r0 = abs(a) * abs(b) / 2.0
        K = tb.K(r0)
        if not math.isinf(K):
            best = (K / 4.0) * _geom(4.0 / abs(a) ** 2) * _geom(4.0 / abs(b) ** 2)
    for coast, other in ((a, b), (b, a)):
        r = ray(coast, other, c)
        if r is None:
            continue
        est = _ray_tail(r, tb)
        if est < best:
            best = est
    return best


def _ray_tail(r: Ray, tb: TermBound) -> float:
    K1 = tb.K(r.G2)
    K2 = tb.K(r.G1 * r.G2 / 2.0)
    if math.isinf(K1) or math.isinf(K2):
        return math.inf
    li2 = r.lam_abs ** -2
    neighbours = K1 * (4.0 / r.P_abs ** 2) * li2 * li2 / (1.0 - li2)
    p1 = 4.0 / r.G1 ** 2
    if p1 >= 1.0:
        return math.inf
    cfac = (1.0 / (1.0 - p1)) ** 2
    subs = (K2 / 4.0) * cfac * 256.0 / r.P_abs ** 4 * li2 ** 3 / (1.0 - li2 * li2)
    return neighbours + subs
