"""Markoff maps invariant under a hyperbolic mapping class H.

The axis of H in the tree splits the regions into a left and a right
class.  Modulo H, the regions are the axis-adjacent regions of one period
plus, at each axis vertex, the branch hanging off the axis there.  Each such
branch has two consecutive axis-adjacent regions of one side as coasts and
the axis-adjacent region of the other side behind it.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import numpy as np

from .branch_kernel import edge_psi, markoff_mu, mod_distance, nu_of_mu
from .farey_tree import (
    INF,
    ONE,
    ZERO,
    AxisDescription,
    NotHyperbolic,
    Region,
    act,
    monodromy_axis,
    other_region,
    word_matrix,
)
from .identity_evaluator import BranchSummer, IdentityReport, is_type_preserving
from .markoff_engine import MarkoffMap

INVARIANCE_TOL = 1e-8


class NotInvariant(ValueError):
    pass


class NoConvergence(RuntimeError):
    pass


def _as_matrix(H):
    return word_matrix(H) if isinstance(H, str) else H


def _check_hyperbolic(H) -> None:
    (a, _), (_, d) = H
    if abs(a + d) <= 2:
        raise NotHyperbolic(f"trace {a + d} is not hyperbolic")


@dataclass
class InvariantMapCertificate:
    defect: float
    sample: int

    def to_json(self) -> dict:
        return {"defect": self.defect, "sample": self.sample}


def _sample_regions(axis: AxisDescription, depth: int) -> list[Region]:
    regions = list(dict.fromkeys(axis.left + axis.right + [r for e in axis.edges for r in e]))
    frontier = [(A, B, C) for A, B, C in axis.left_edges + axis.right_edges]
    for _ in range(depth):
        nxt = []
        for A, B, C in frontier:
            D = other_region(A, B, C)
            regions.append(D)
            nxt.extend([(A, D, B), (D, B, A)])
        frontier = nxt
    return regions


def verify_invariance(m: MarkoffMap, H, sample_depth: int = 4) -> InvariantMapCertificate:
    """Largest |phi(X) - phi(H X)| over an axis period and the branches next to it."""
    H = _as_matrix(H)
    _check_hyperbolic(H)
    axis = monodromy_axis(H)
    regions = _sample_regions(axis, sample_depth)
    defect = max(abs(m(X) - m(act(H, X))) for X in regions)
    return InvariantMapCertificate(defect, len(regions))


# -- solving for invariant triples --------------------------------------------


def _residual(H, v: np.ndarray, mu0: complex) -> np.ndarray:
    m = MarkoffMap(*v)
    hx, hy, hz = m(act(H, INF)), m(act(H, ZERO)), m(act(H, ONE))
    return np.array([hx - v[0], hy - v[1], hz - v[2], markoff_mu(*v) - mu0], dtype=complex)


def _jacobian(H, v: np.ndarray, mu0: complex, step: float = 1e-7) -> np.ndarray:
    J = np.empty((4, 3), dtype=complex)
    for k in range(3):
        e = np.zeros(3, dtype=complex)
        e[k] = step * max(1.0, abs(v[k]))
        J[:, k] = (_residual(H, v + e, mu0) - _residual(H, v - e, mu0)) / (2 * e[k])
    return J


def newton_invariant(H, mu0: complex, guess, max_iter: int = 60, tol: float = 1e-13) -> np.ndarray:
    """Gauss-Newton on phi(H oo) = x, phi(H 0) = y, phi(H 1) = z, mu = mu0."""
    H = _as_matrix(H)
    v = np.array(guess, dtype=complex)
    for _ in range(max_iter):
        r = _residual(H, v, mu0)
        scale = 1.0 + float(np.max(np.abs(v)))
        if float(np.max(np.abs(r))) < tol * scale:
            return v
        J = _jacobian(H, v, mu0)
        dv, *_ = np.linalg.lstsq(J, -r, rcond=None)
        # Damp huge steps, which usually mean the guess is far off.
        n = float(np.max(np.abs(dv)))
        if n > 10.0 * scale:
            dv *= 10.0 * scale / n
        v = v + dv
        if not np.all(np.isfinite(v)):
            break
    raise NoConvergence("Newton iteration for an invariant triple did not converge")


def solve_invariant(
    H,
    mu: complex = 0.0,
    guess=None,
    seed: int = 0,
    attempts: int = 200,
    require_bq: bool = True,
) -> MarkoffMap:
    """A mu-Markoff map invariant under H.

    With no guess, random starting triples are tried in a fixed order (from
    ``seed``) and the first solution that is not real and passes the BQ test
    is kept; among conjugate pairs the one with positive imaginary part of x
    is returned.
    """
    H = _as_matrix(H)
    _check_hyperbolic(H)
    mu = complex(mu)
    if guess is not None:
        return MarkoffMap(*newton_invariant(H, mu, guess))
    rng = random.Random(seed)
    for _ in range(attempts):
        g = [complex(rng.uniform(-4, 4), rng.uniform(-4, 4)) for _ in range(3)]
        try:
            v = newton_invariant(H, mu, g)
        except (NoConvergence, OverflowError, ZeroDivisionError, np.linalg.LinAlgError):
            continue
        if max(abs(t.imag) for t in v) < 1e-6:
            continue
        if mu.imag == 0 and (v[0].imag < 0 or (abs(v[0].imag) < 1e-9 and v[1].imag < 0)):
            v = np.conj(v)
        m = MarkoffMap(*v)
        if require_bq and check_relative_bq(m, H).status != "Satisfied":
            continue
        return m
    raise NoConvergence("no invariant triple found from random starts")


def continue_invariant(H, m: MarkoffMap, mu_target: complex, steps: int = 10) -> MarkoffMap:
    """Follow an invariant triple from its mu to ``mu_target`` in straight-line steps."""
    H = _as_matrix(H)
    v = np.array(m.seed.as_tuple(), dtype=complex)
    mu0 = m.mu
    for k in range(1, steps + 1):
        v = newton_invariant(H, mu0 + (complex(mu_target) - mu0) * k / steps, v)
    return MarkoffMap(*v)


# -- quotient and sums --------------------------------------------------------


@dataclass
class Quotient:
    axis: AxisDescription
    left: list[Region]
    right: list[Region]
    left_branches: list[tuple[Region, Region, Region]]
    right_branches: list[tuple[Region, Region, Region]]

    def to_json(self) -> dict:
        fmt = lambda bs: [[str(s) for s in b] for b in bs]
        return {
            "word": self.axis.word,
            "period": self.axis.period,
            "left": [str(s) for s in self.left],
            "right": [str(s) for s in self.right],
            "left_branches": fmt(self.left_branches),
            "right_branches": fmt(self.right_branches),
        }


def quotient_regions(H, budget: int = 10_000) -> Quotient:
    """Representatives of the regions modulo H, tagged left or right of the axis.

    Axis-adjacent regions are listed directly; every other region lies in
    exactly one of the listed branches (triples (coast, coast, region behind)).
    """
    H = _as_matrix(H)
    axis = monodromy_axis(H, budget)
    return Quotient(axis, list(axis.left), list(axis.right), list(axis.left_edges), list(axis.right_edges))


def check_relative_bq(m: MarkoffMap, H, t: float = 2.0, budget: int = 20_000):
    """BQ test on the quotient by H: axis-adjacent regions of a period and the branches off the axis.

    The whole-tree test does not apply to invariant maps: their small values
    repeat along the axis forever.  Evaluated far along the axis, a floating
    point map also drifts away from invariance, so only the quotient is
    examined.
    """
    from .bq_analyzer import check_bq_part

    q = quotient_regions(_as_matrix(H))
    return check_bq_part(m, q.left + q.right, q.left_branches + q.right_branches, t, budget)


def _side_sum(m: MarkoffMap, regions, branches, mode: str, tol: float, budget: int):
    summer = BranchSummer(m.mu, mode)
    for X in regions:
        summer.add_region(X, m(X))
    for A, B, C in branches:
        summer.add_branch(A, B, C, m(A), m(B), m(C))
    return summer.run(tol, budget), summer


def _require_invariant(m: MarkoffMap, H, tol: float = INVARIANCE_TOL) -> float:
    cert = verify_invariance(m, H)
    if cert.defect > tol * max(1.0, max(abs(v) for v in m.seed.as_tuple())):
        raise NotInvariant(f"invariance defect {cert.defect:.3g}")
    return cert.defect


def bundle_sum(m: MarkoffMap, H, tol: float = 1e-8, budget: int = 1_000_000) -> IdentityReport:
    """Sum of the gap function over the quotient by H; target 0 mod 2 pi i.

    At tau = -2 the sum of h(x) over the quotient is returned instead (also
    with target 0), being the derivative of the gap identity in nu.
    """
    H = _as_matrix(H)
    defect = _require_invariant(m, H)
    q = quotient_regions(H)
    mode = "h" if is_type_preserving(m.mu) else "gap"
    half = tol / 2.0
    (ls, lt, _), s1 = _side_sum(m, q.left, q.left_branches, mode, half, budget)
    (rs, rt, _), s2 = _side_sum(m, q.right, q.right_branches, mode, half, budget)
    tail = lt + rt
    rep = IdentityReport(m.mu, nu_of_mu(m.mu), ls + rs, 0j, s1.regions + s2.regions, tail, tail < tol, mode)
    rep.extra.update(
        {
            "monodromy_word": q.axis.word,
            "m": q.axis.period,
            "defect": defect,
            "left_sum": [ls.real, ls.imag],
            "right_sum": [rs.real, rs.imag],
            "bundle_residue": [rep.residue.real, rep.residue.imag],
        }
    )
    return rep


@dataclass
class LongitudeReport:
    left_sum: complex
    right_sum: complex
    lambda_telescoped: complex
    lambda_right: complex
    mode: str
    tail_bound: float
    regions: int
    sign: int
    extra: dict = field(default_factory=dict)

    def agreement(self) -> float:
        """Distance between the left sum and +-lambda, whichever is closer."""
        if self.mode == "gap":
            return min(mod_distance(self.left_sum, self.lambda_telescoped), mod_distance(self.left_sum, -self.lambda_telescoped))
        return min(abs(self.left_sum - self.lambda_telescoped), abs(self.left_sum + self.lambda_telescoped))

    def to_json(self) -> dict:
        out = {
            "left_sum": [self.left_sum.real, self.left_sum.imag],
            "right_sum": [self.right_sum.real, self.right_sum.imag],
            "lambda_telescoped": [self.lambda_telescoped.real, self.lambda_telescoped.imag],
            "agreement": self.agreement(),
            "mode": self.mode,
            "tail_bound": self.tail_bound,
            "regions": self.regions,
            "monodromy_sign": self.sign,
        }
        out.update(self.extra)
        return out


def telescoped_lambda(m: MarkoffMap, branches, mode: str) -> complex:
    """Sum of edge weights over one period of axis edges on one side.

    In gap mode each term is psi(x_{j-1}, x_j; z_j).  In h mode (tau = -2)
    each term is z_j / (2 x_{j-1} x_j), the nu-derivative of psi divided by 2.
    """
    total = []
    for A, B, C in branches:
        a, b, c = m(A), m(B), m(C)
        total.append(edge_psi(a, b, c, m.mu) if mode == "gap" else c / (2.0 * a * b))
    return complex(math.fsum(t.real for t in total), math.fsum(t.imag for t in total))


def longitude_sum(m: MarkoffMap, H, tol: float = 1e-8, budget: int = 1_000_000) -> LongitudeReport:
    """Left-side sum over the quotient compared with the telescoped edge weights."""
    H = _as_matrix(H)
    defect = _require_invariant(m, H)
    q = quotient_regions(H)
    mode = "h" if is_type_preserving(m.mu) else "gap"
    (ls, lt, _), s1 = _side_sum(m, q.left, q.left_branches, mode, tol / 2, budget)
    (rs, rt, _), s2 = _side_sum(m, q.right, q.right_branches, mode, tol / 2, budget)
    lam_l = telescoped_lambda(m, q.left_branches, mode)
    lam_r = telescoped_lambda(m, q.right_branches, mode)
    return LongitudeReport(
        ls,
        rs,
        lam_l,
        lam_r,
        mode,
        lt + rt,
        s1.regions + s2.regions,
        q.axis.sign,
        {
            "monodromy_word": q.axis.word,
            "m": q.axis.period,
            "defect": defect,
            "mu": [m.mu.real, m.mu.imag],
            "nu": [nu_of_mu(m.mu).real, nu_of_mu(m.mu).imag],
        },
    )
