import cmath
import math
import random

import numpy as np
import pytest

from markoff.branch_kernel import frak_h, markoff_mu, nu_of_mu
from markoff.geometry_verify import (
    INFTY,
    DegenerateConfiguration,
    DegenerateLine,
    NotLoxodromic,
    NotNormal,
    axis,
    common_normal,
    complex_distance,
    fixed_points,
    gap_closed_form,
    gap_closed_form_log,
    gap_geometric,
    hexagon_report,
    inv,
    is_inf,
    is_line,
    line_ends,
    line_through,
    mat,
    mobius,
    normal_from_point,
    translation_length,
)
from markoff.markoff_engine import reconstruct_representation

from conftest import close_mod, random_admissible_triple, random_complex

R2 = math.sqrt(2)


def parabolic_pair():
    from markoff.gap_drawer import parabolic_example

    return parabolic_example()


def random_sl2(rng):
    while True:
        a, b, c = (random_complex(rng, (-2, 2), (-2, 2)) for _ in range(3))
        if abs(a) > 0.2:
            d = (1 + b * c) / a
            return mat(a, b, c, d)


def loxodromic(M):
    t = complex(np.trace(M))
    return not (abs(t.imag) < 1e-6 and abs(t.real) <= 2 + 1e-6)


def random_pair(rng):
    while True:
        A, B = random_sl2(rng), random_sl2(rng)
        Ap = inv(B) @ inv(A) @ B
        K = Ap @ A
        if loxodromic(A) and loxodromic(K) and abs(np.trace(K) ** 2 - 4) > 1e-3:
            return A, B


def iterate(M, z, steps=200):
    for _ in range(steps):
        z = mobius(M, z)
    return z


# -- fixed points ---------------------------------------------------------------


def test_fixed_points_parabolic_example():
    A, _ = parabolic_pair()
    plus, minus = fixed_points(A)
    assert abs(plus - (1 - R2 / 2)) < 1e-12
    assert abs(iterate(A, 1j) - plus) < 1e-10
    assert abs(mobius(A, minus) - minus) < 1e-10


def test_fixed_points_diagonal():
    lam = 1.7 + 0.4j
    plus, minus = fixed_points(mat(lam, 0, 0, 1 / lam))
    assert is_inf(plus) and minus == 0
    plus, minus = fixed_points(mat(1 / lam, 0, 0, lam))
    assert plus == 0 and is_inf(minus)


def test_fixed_points_iteration_oracle():
    rng = random.Random(31)
    for _ in range(100):
        A = random_sl2(rng)
        t = complex(np.trace(A))
        if not loxodromic(A) or abs(t * t - 4) < 1e-2:
            continue
        plus, minus = fixed_points(A)
        if is_inf(plus):
            continue
        # Iterating from a generic point lands on the attracting point.
        start = 0.37 + 0.91j
        if abs(start - minus) < 1e-3:
            start += 0.5
        got = iterate(A, start, 400)
        assert abs(got - plus) < 1e-7 * max(1.0, abs(plus))


def test_fixed_points_equivariance():
    rng = random.Random(32)
    for _ in range(100):
        A, K = random_sl2(rng), random_sl2(rng)
        if not loxodromic(A):
            continue
        p, m = fixed_points(A)
        q, n = fixed_points(K @ A @ inv(K))
        for u, v in ((p, q), (m, n)):
            w = mobius(K, u)
            if is_inf(w) or is_inf(v):
                continue
            assert abs(w - v) < 1e-7 * max(1.0, abs(v))


def test_fixed_points_rejects_elliptic():
    with pytest.raises(NotLoxodromic):
        fixed_points(mat(1, 1, -1, 0))


# -- lines ------------------------------------------------------------------------


def test_line_examples():
    l = line_through(0, INFTY)
    assert is_line(l)
    # z -> -z up to sign.
    assert abs(mobius(l, 2 + 1j) + (2 + 1j)) < 1e-14
    l = line_through(1, -1)
    assert abs(np.trace(l)) < 1e-15 and is_line(l)
    assert abs(mobius(l, 1) - 1) < 1e-14 and abs(mobius(l, -1) + 1) < 1e-14
    with pytest.raises(DegenerateLine):
        line_through(2, 2)


def test_line_round_trip():
    rng = random.Random(33)
    for _ in range(100):
        p, q = random_complex(rng), random_complex(rng)
        l = line_through(p, q)
        assert is_line(l, 1e-10)
        tail, head = line_ends(l)
        assert abs(tail - p) < 1e-9 and abs(head - q) < 1e-9
        assert line_ends(-l) == pytest.approx((head, tail))
    assert line_ends(line_through(3, INFTY))[0] == pytest.approx(3)
    assert is_inf(line_ends(line_through(3, INFTY))[1])


def test_distance_basic_identities():
    rng = random.Random(34)
    for _ in range(100):
        a, b = random_complex(rng), random_complex(rng)
        n = line_through(a, b)
        l = normal_from_point(n, random_complex(rng))
        m = normal_from_point(n, random_complex(rng))
        d = complex_distance(n, l, m)
        assert abs(complex_distance(n, l, l)) < 1e-9
        assert close_mod(complex_distance(n, -l, m), d + 1j * math.pi) < 1e-8
        assert close_mod(complex_distance(n, l, -m), d + 1j * math.pi) < 1e-8
        k = normal_from_point(n, random_complex(rng))
        assert close_mod(d + complex_distance(n, m, k), complex_distance(n, l, k)) < 1e-8
        # Both defining equations hold at once.
        assert abs(cmath.cosh(d) + 0.5 * np.trace(m @ l)) < 1e-8 * max(1, abs(cmath.cosh(d)))
        assert abs(cmath.sinh(d) + 0.5j * np.trace(m @ n @ l)) < 1e-8 * max(1, abs(cmath.sinh(d)))


def test_distance_requires_normal():
    with pytest.raises(NotNormal):
        complex_distance(line_through(0, INFTY), line_through(1, 2), line_through(-1, 3))


def test_conjugation_lemma():
    rng = random.Random(35)
    for _ in range(100):
        K = random_sl2(rng)
        if not loxodromic(K):
            continue
        n = axis(K)
        l = normal_from_point(n, random_complex(rng))
        m = K @ l @ inv(K)
        assert close_mod(complex_distance(n, l, m), translation_length(K)) < 1e-7


def test_common_normal():
    rng = random.Random(36)
    for _ in range(50):
        l = line_through(random_complex(rng), random_complex(rng))
        m = line_through(random_complex(rng), random_complex(rng))
        n = common_normal(l, m)
        assert is_line(n, 1e-8)
        assert abs(np.trace(n @ l)) < 1e-8 and abs(np.trace(n @ m)) < 1e-8
        assert complex_distance(n, l, m).real >= 0
    with pytest.raises(DegenerateConfiguration):
        common_normal(line_through(0, 1), line_through(0, 1))


# -- translation lengths -----------------------------------------------------


def test_translation_length():
    K = mat(R2, 1, 1, R2)  # trace 2 sqrt 2, det 1
    assert abs(np.linalg.det(K) - 1) < 1e-14
    assert abs(translation_length(K) - 2 * math.log(R2 + 1)) < 1e-12
    assert abs(translation_length(mat(1, 1, 0, 1))) < 1e-12
    with pytest.raises(ValueError):
        translation_length(np.eye(2, dtype=complex))


def test_translation_length_conjugation_invariant():
    rng = random.Random(37)
    for _ in range(100):
        K, G = random_sl2(rng), random_sl2(rng)
        assert close_mod(translation_length(K), translation_length(G @ K @ inv(G))) < 1e-8


# -- gaps -----------------------------------------------------------------------


def test_gap_444():
    A, B = reconstruct_representation(4, 4, 4)
    assert close_mod(gap_geometric(A, B), frak_h(-18, 4)) < 1e-8


def test_gap_degenerate_at_parabolic_commutator():
    A, B = reconstruct_representation(3, 3, 3)
    with pytest.raises(DegenerateConfiguration):
        gap_geometric(A, B)


def test_gap_lemma_random_pairs():
    rng = random.Random(38)
    for _ in range(100):
        A, B = random_pair(rng)
        tau = complex(np.trace(inv(B) @ inv(A) @ B @ A))
        x = complex(np.trace(A))
        g = gap_geometric(A, B)
        assert close_mod(g, frak_h(tau, x)) < 1e-7
        Ap = inv(B) @ inv(A) @ B
        assert close_mod(g, gap_closed_form(A, Ap)) < 1e-7
        assert close_mod(gap_closed_form(A, Ap), gap_closed_form_log(A, Ap)) < 1e-9


def test_gap_invariances():
    rng = random.Random(39)
    for _ in range(30):
        A, B = random_pair(rng)
        g = gap_geometric(A, B)
        for k in (1, 2):
            BAk = B @ np.linalg.matrix_power(A, k)
            # Rounding grows with the squared size of the entries.
            size = float(np.max(np.abs(BAk))) ** 2
            assert close_mod(gap_geometric(A, BAk), g) < max(1e-7, 1e-12 * size)
        G = random_sl2(rng)
        Gi = inv(G)
        assert close_mod(gap_geometric(G @ A @ Gi, G @ B @ Gi), g) < 1e-7


# -- hexagons ----------------------------------------------------------------------


def test_hexagon_444():
    rep = hexagon_report(4, 4, 4)
    assert abs(rep.alpha - rep.beta) < 1e-8 and abs(rep.beta - rep.gamma) < 1e-8
    assert close_mod(3 * (rep.gamma + 1j * math.pi), math.acosh(9)) < 1e-8
    assert abs(rep.kappa ** 2 - 4 / -16) < 1e-8


def test_hexagon_random():
    rng = random.Random(40)
    for _ in range(100):
        x, y, z = random_admissible_triple(rng)
        rep = hexagon_report(x, y, z)
        mu = markoff_mu(x, y, z)
        assert rep.factor_residual < 1e-8
        assert rep.midpoint_residual < 1e-8
        for k in (rep.kappa, rep.kappa_b, rep.kappa_c):
            assert abs(k * k - 4 / mu) < 1e-8 * max(1.0, abs(4 / mu))
        assert close_mod(rep.turning_sum, nu_of_mu(mu)) < 1e-7
        # cosh of the axis distances recovers the traces (up to sign).
        for t, v in ((rep.p_t, x), (rep.q_t, y), (rep.r_t, z)):
            assert min(abs(cmath.cosh(t) - v / 2), abs(cmath.cosh(t) + v / 2)) < 1e-8 * max(1.0, abs(v))
        # The turning lengths match Psi at least modulo pi i.
        assert all(c in ("2pi", "pi") for c in rep.psi_classes)


def test_hexagon_json_and_degenerate():
    data = hexagon_report(4, 4, 4).to_json()
    assert data["kappa"] == pytest.approx([0.0, 0.5]) or data["kappa"] == pytest.approx([0.0, -0.5])
    with pytest.raises(DegenerateConfiguration):
        hexagon_report(3, 3, 3)
