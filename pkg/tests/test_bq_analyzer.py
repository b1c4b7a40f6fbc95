import cmath
import math
import random
from math import gcd

import pytest

from markoff.bq_analyzer import (
    BudgetExceeded,
    build_tree,
    check_bq,
    check_bq_part,
    estimate_m,
    fibonacci_report,
    omega_k,
)
from markoff.farey_tree import INF, ONE, ZERO, are_neighbors, edge_quad, slope
from markoff.markoff_engine import arrow, from_mu, from_triple

from conftest import random_bq_maps


def slopes_up_to(max_den, max_num):
    out = [INF]
    for q in range(1, max_den + 1):
        for p in range(-max_num, max_num + 1):
            if gcd(p, q) == 1:
                out.append(slope(p, q))
    return out


BASE = {INF, ZERO, ONE}


def test_omega_examples():
    assert omega_k(from_triple(3, 3, 3), 2) == {}
    assert set(omega_k(from_triple(3, 3, 3), 3)) == BASE
    assert set(omega_k(from_triple(4, 4, 4), 4)) == BASE
    assert len(omega_k(from_triple(3, 3, 3), 6)) == 6


def test_omega_budget():
    # A coast inside (-2, 2) has infinitely many small neighbours.
    m = from_mu(1.0, 3.0, 2.0)
    with pytest.raises(BudgetExceeded) as info:
        omega_k(m, 10, budget=500)
    assert info.value.partial is not None


def test_omega_connected():
    rng = random.Random(3)
    for m, _ in random_bq_maps(rng, 5):
        regs = list(omega_k(m, 8))
        if not regs:
            continue
        seen, todo = {regs[0]}, [regs[0]]
        while todo:
            r = todo.pop()
            for s in regs:
                if s not in seen and are_neighbors(r, s):
                    seen.add(s)
                    todo.append(s)
        assert seen == set(regs)


def test_pruning_soundness_against_brute_force():
    rng = random.Random(7)
    pool = slopes_up_to(60, 60)
    for m, _ in random_bq_maps(rng, 20):
        for k in (4.0, 12.0):
            found = omega_k(m, k)
            brute = {r for r in pool if abs(m(r)) <= k}
            assert brute <= set(found)
            for r, v in found.items():
                assert abs(v) <= k


def connected_edges(edges):
    edges = list(edges)
    if not edges:
        return True

    def touch(e, f):
        shared = set(e) & set(f)
        if len(shared) != 1:
            return False
        (a,), (b,) = set(e) - shared, set(f) - shared
        return are_neighbors(a, b)

    seen, todo = {edges[0]}, [edges[0]]
    while todo:
        e = todo.pop()
        for f in edges:
            if f not in seen and touch(e, f):
                seen.add(f)
                todo.append(f)
    return len(seen) == len(edges)


def test_tree_333():
    m = from_triple(3, 3, 3)
    tree = build_tree(m, 1.0)
    assert tree.edges
    assert tuple(sorted((INF, ZERO), key=lambda s: s.sort_key())) in tree.edges
    assert connected_edges(tree.edges)


def test_tree_monotone_and_attracting():
    rng = random.Random(8)
    for m, _ in random_bq_maps(rng, 6):
        small, big = build_tree(m, 1.0), build_tree(m, 3.0)
        assert small.edges <= big.edges
        assert connected_edges(big.edges)
        for X, Y in big.edges:
            x = m(X)
            assert abs(x) <= 5 + 1e-9 or abs(m(Y)) <= 5 + 1e-9
        if not big.edges:
            continue
        touching = {frozenset(e) for e in big.edges}
        for d in big.circular_boundary():
            # Arrows on edges next to the tree point back at it.
            tree_side = [
                W for W in edge_quad(d.X, d.Y) if {W, d.X} in touching or {W, d.Y} in touching
            ]
            a = arrow(m, d.X, d.Y)
            assert a.head in tree_side or a.tie


def test_tree_infinite_when_a_coast_is_small():
    m = from_mu(1.0, 3.0, 2.0)
    with pytest.raises(BudgetExceeded):
        build_tree(m, 2.0, budget=2_000)


def test_tree_nonempty_past_threshold():
    m = from_triple(3, 3, 3)
    assert estimate_m(m) == 3
    assert build_tree(m, estimate_m(m) - 2).edges


def test_verdicts():
    v = check_bq(from_triple(3, 3, 3))
    assert v.status == "Satisfied" and v.exit_code == 0
    assert v.to_json()["status"] == "Satisfied"
    v = check_bq(from_mu(1.0, 3.0, 2.0))
    assert v.status == "Violated" and v.reason == "value_in_[-2,2]" and v.witness == INF
    assert v.exit_code == 2
    mu = -16 + 3j
    v = check_bq(from_mu(cmath.sqrt(mu), 5.0, mu))
    assert v.status == "Violated" and v.reason == "value_squared_is_mu"
    assert set(v.to_json()) >= {"status", "t", "tree_edges", "witness", "min_abs_value", "budget_used"}


def test_inconclusive_on_budget():
    v = check_bq(from_triple(3, 3, 3), budget=1)
    assert v.status == "Inconclusive" and v.exit_code == 3


def test_part_check():
    m = from_triple(3, 3, 3)
    v = check_bq_part(m, [INF], [(INF, ZERO, ONE)])
    assert v.status == "Satisfied"


def test_openness_probe():
    rng = random.Random(9)
    m0 = from_triple(3, 3, 3)
    for _ in range(100):
        seed = [v * (1 + 1e-6 * complex(rng.uniform(-1, 1), rng.uniform(-1, 1))) for v in (3, 3, 3)]
        assert check_bq(from_triple(*seed), t=2.0).status == "Satisfied"
    assert check_bq(m0).status == "Satisfied"


def test_power_sum_converges():
    m = from_triple(4, 4, 4)
    sums = []
    for k in (10, 100, 1000, 10000):
        sums.append(sum(abs(v) ** -3 for v in omega_k(m, k).values()))
    diffs = [b - a for a, b in zip(sums, sums[1:])]
    assert all(d >= 0 for d in diffs)
    assert diffs[2] < diffs[1] < diffs[0]


@pytest.mark.parametrize("triple, depth", [((3, 3, 3), 8), ((4, 4, 4), 10)])
def test_fibonacci_bounds(triple, depth):
    rep = fibonacci_report(from_triple(*triple), depth=depth)
    assert rep.vertices > 0
    assert not rep.upper_violations
    assert rep.lower_checked > 0
    assert not rep.lower_violations
    assert abs(rep.m - math.log(triple[0])) < 1e-12


def test_fibonacci_examples_333():
    # Value 6 sits at F = 2 and clears 2 (log 3 - log 2).
    assert math.log(6) >= 2 * (math.log(3) - math.log(2))
    assert math.log(6) <= math.log(4) + 2 * math.log(3)
    rep = fibonacci_report(from_triple(3, 3, 3), depth=8)
    assert rep.min_lower_slack >= 0 and rep.min_upper_slack >= 0


def test_fibonacci_on_random_seeds():
    rng = random.Random(10)
    for m, _ in random_bq_maps(rng, 10):
        rep = fibonacci_report(m, depth=7)
        assert not rep.upper_violations
        assert not rep.lower_violations
