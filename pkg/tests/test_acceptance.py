"""Acceptance criteria 1-12, each at its stated tolerance.

Every test prints one ``PASS criterion N`` or ``FAIL criterion N`` line; the
lines are repeated in the terminal summary.
"""

import math
import random
import time

import numpy as np
import pytest

from markoff.bq_analyzer import check_bq, fibonacci_report
from markoff.branch_kernel import Psi, edge_psi, frak_h, markoff_mu, mod_distance, nu_of_mu
from markoff.bundle_mode import bundle_sum, longitude_sum, solve_invariant, verify_invariance
from markoff.farey_tree import INF, slope
from markoff.gap_drawer import (
    C_INV,
    C_WORD,
    commutator,
    evaluate,
    farey_parents_q,
    gap_segments,
    indices,
    inverse,
    mul,
    parabolic_example,
    stern_brocot_indices,
    word_pair,
)
from markoff.geometry_verify import gap_closed_form, gap_geometric, hexagon_report, inv
from markoff.identity_evaluator import mcshane_sum
from markoff.markoff_engine import MarkoffMap, from_mu, from_triple, neighbor_sequence

from conftest import ACCEPTANCE_LINES, random_admissible_triple, random_bq_maps


def verdict(n, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def complex_seed():
    return from_mu(6, 3 + 1j, -0.8)


def test_criterion_1_classical_identity():
    start = time.perf_counter()
    rep = mcshane_sum(from_triple(3, 3, 3), tol=1e-9, budget=1_000_000)
    elapsed = time.perf_counter() - start
    err = abs(rep.partial_sum - 0.5)
    ok = rep.converged and err < 1e-8 and rep.regions <= 1_000_000 and elapsed < 30
    verdict(1, ok, f"|sum - 1/2| = {err:.2e}, {rep.regions} regions, {elapsed:.2f} s")


def test_criterion_2_real_identity():
    rep = mcshane_sum(from_triple(4, 4, 4), tol=1e-9)
    err = mod_distance(rep.partial_sum, math.acosh(9))
    ok = rep.converged and err < 1e-8 and abs(rep.target - math.acosh(9)) < 1e-12
    verdict(2, ok, f"residue {rep.residue:.10f} vs acosh 9, error {err:.2e}")


def test_criterion_3_complex_identity():
    m = complex_seed()
    bq = check_bq(m, t=2.0)
    rep = mcshane_sum(m, tol=1e-7)
    err = mod_distance(rep.partial_sum, nu_of_mu(-0.8))
    ok = bq.status == "Satisfied" and bq.tree_edges > 0 and rep.converged and err < 1e-6
    verdict(3, ok, f"BQ {bq.status} with {bq.tree_edges} tree edges, error {err:.2e}")


def test_criterion_4_psi_closure():
    rng = random.Random(4)
    worst = 0.0
    for _ in range(1000):
        x, y, z = random_admissible_triple(rng)
        mu = markoff_mu(x, y, z)
        nu = nu_of_mu(mu)
        w = x * y - z  # the fourth value across the edge between x and y
        for f in (lambda a, b, c: Psi(a, b, c, mu=mu), lambda a, b, c: edge_psi(a, b, c, mu)):
            worst = max(worst, mod_distance(f(x, y, z) + f(y, z, x) + f(z, x, y), nu))
            worst = max(worst, mod_distance(f(x, y, z) + f(x, y, w), nu))
    verdict(4, worst < 1e-9, f"worst residual {worst:.2e} over 1000 triples")


COASTS = [
    (lambda: from_triple(4, 4, 4), INF, 1),
    (lambda: from_triple(4, 4, 4), INF, -1),
    (complex_seed, slope(2, 3), 1),
    (complex_seed, slope(2, 3), -1),
    (lambda: from_triple(3 + 1j, 5 - 2j, 2 + 0.5j), INF, 1),
    (lambda: from_triple(3 + 1j, 5 - 2j, 2 + 0.5j), INF, -1),
]


def coast_slope(m, X, step, terms=16):
    x, mu = m(X), m.mu
    ys = neighbor_sequence(m, X, range(0, step * terms, step))
    pts = []
    for small, big in zip(ys, ys[1:]):
        err = mod_distance(2 * Psi(x, big, small, mu=mu), frak_h(mu - 2, x))
        # Below 1e-11 the difference is rounding, not the asymptotic term.
        if err > 1e-11:
            pts.append((math.log(abs(big)), math.log(err)))
    P = np.array(pts)
    return len(P), float(np.polyfit(P[:, 0], P[:, 1], 1)[0])


def test_criterion_5_asymptotic_slope():
    fits = [coast_slope(make(), X, step) for make, X, step in COASTS]
    ok = all(n >= 5 and abs(s + 2) <= 0.1 for n, s in fits)
    verdict(5, ok, "slopes " + ", ".join(f"{s:.3f} ({n} pts)" for n, s in fits))


def test_criterion_6_word_invariants():
    idx = stern_brocot_indices(-4, 4, 8)
    failures = 0
    for t in idx:
        wp = word_pair(t)
        failures += mul(inverse(wp.L), wp.R) != C_WORD
        failures += word_pair(t + 2).L != inverse(wp.R)
        failures += word_pair(t + 4).L != mul(C_INV, wp.L, C_WORD)
        par = farey_parents_q(t)
        if par is None:
            continue
        for lo, hi in ((par[0], t), (t, par[1])):
            failures += commutator(inverse(word_pair(hi).L), inverse(word_pair(lo).R)) != C_WORD
        Lr = word_pair(par[1]).L
        failures += wp.L != mul(inverse(Lr), wp.R, Lr)
    ints = sorted(t for t in idx if t.denominator == 1)
    for lo, hi in zip(ints, ints[1:]):
        failures += commutator(inverse(word_pair(hi).L), inverse(word_pair(lo).R)) != C_WORD
    verdict(6, failures == 0, f"{failures} failures over {len(idx)} indices")


FIGURE_LABELS = [
    "B", "BaC", "Ba", "aC", "a", "ab", "ba", "b", "bc", "Ab", "Abc", "A", "Ac", "ABc",
    "CBc", "CBa", "CBac", "Ca", "Cac", "Cabc", "Cbac", "Cbc",
]


def test_criterion_7_parabolic_numerics():
    rep = parabolic_example()
    C = evaluate(C_WORD, rep)
    c_err = float(np.max(np.abs(C - np.array([[-1, 4], [0, -1]]))))
    parts = {"a": (1,), "b": (2,), "c": C_WORD, "A": (-1,), "B": (-2,), "C": C_INV}
    points = {}
    for s in gap_segments(rep, indices(-1, 5, 2)):
        points[s.L], points[s.R] = s.start, s.end
    xs = []
    for name in FIGURE_LABELS:
        w = mul(*(parts[ch] for ch in name))
        xs.append(points[w].real if w in points else math.nan)
    ordered = all(a < b for a, b in zip(xs, xs[1:]))
    verdict(7, c_err < 1e-12 and ordered, f"evaluate(c) error {c_err:.1e}, figure order {'matches' if ordered else 'differs'}")


def random_pair(rng):
    def sl2():
        while True:
            a, b, c = (complex(rng.uniform(-2, 2), rng.uniform(-2, 2)) for _ in range(3))
            if abs(a) > 0.2:
                return np.array([[a, b], [c, (1 + b * c) / a]])

    while True:
        A, B = sl2(), sl2()
        tA = complex(np.trace(A))
        tau = complex(np.trace(inv(B) @ inv(A) @ B @ A))
        lox_A = not (abs(tA.imag) < 1e-6 and abs(tA.real) <= 2 + 1e-6)
        if lox_A and not (abs(tau.imag) < 1e-3 and abs(tau.real) <= 2 + 1e-3):
            return A, B, tau


def test_criterion_8_gap_oracle():
    rng = random.Random(8)
    worst_h = worst_closed = 0.0
    for _ in range(100):
        A, B, tau = random_pair(rng)
        g = gap_geometric(A, B)
        worst_h = max(worst_h, mod_distance(g, frak_h(tau, complex(np.trace(A)))))
        worst_closed = max(worst_closed, mod_distance(g, gap_closed_form(A, inv(B) @ inv(A) @ B)))
    ok = worst_h < 1e-7 and worst_closed < 1e-7
    verdict(8, ok, f"gap function {worst_h:.2e}, closed form {worst_closed:.2e}")


def test_criterion_9_hexagons():
    rng = random.Random(9)
    worst_k = worst_sum = 0.0
    for _ in range(100):
        x, y, z = random_admissible_triple(rng)
        rep = hexagon_report(x, y, z)
        worst_k = max(worst_k, abs(rep.kappa ** 2 - 4 / rep.mu))
        worst_sum = max(worst_sum, mod_distance(rep.turning_sum, nu_of_mu(rep.mu)))
    ok = worst_k < 1e-8 and worst_sum < 1e-7
    verdict(9, ok, f"kappa^2 {worst_k:.2e}, turning sum {worst_sum:.2e}")


def test_criterion_10_bundle():
    m = solve_invariant("RL", 0.0)
    defect = verify_invariance(m, "RL").defect
    rep = bundle_sum(m, "RL")
    lon = longitude_sum(m, "RL")
    ok = defect < 1e-9 and rep.converged and rep.error < 1e-6 and lon.agreement() < 1e-6
    verdict(10, ok, f"defect {defect:.1e}, bundle residue {rep.error:.1e}, longitude {lon.agreement():.1e} (internal consistency)")


def test_criterion_11_openness():
    rng = random.Random(11)
    seeds = [(3, 3, 3), (4, 4, 4), complex_seed().seed.as_tuple()]
    bad = 0
    for seed in seeds:
        assert check_bq(MarkoffMap(*seed)).status == "Satisfied"
        for _ in range(100):
            moved = [v * (1 + 1e-6 * complex(rng.uniform(-1, 1), rng.uniform(-1, 1))) for v in seed]
            bad += check_bq(MarkoffMap(*moved)).status != "Satisfied"
    small = from_mu(1.0, 3.0, 2.0)
    runs = [check_bq(small) for _ in range(3)]
    violated = all(v.status == "Violated" and v.witness == runs[0].witness for v in runs)
    verdict(11, bad == 0 and violated, f"{bad} of 300 perturbations left BQ, value 1 seed violated: {violated}")


def test_criterion_12_fibonacci_bounds():
    rng = random.Random(12)
    upper = sum(len(fibonacci_report(m, depth=8).upper_violations) for m, _ in random_bq_maps(rng, 20))
    lower = 0
    for seed in ((3, 3, 3), (4, 4, 4)):
        rep = fibonacci_report(from_triple(*seed), depth=10)
        assert rep.lower_checked > 0
        lower += len(rep.lower_violations) + len(rep.upper_violations)
    verdict(12, upper == 0 and lower == 0, f"{upper} upper violations on 20 seeds, {lower} at depth 10")
