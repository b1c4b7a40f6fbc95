"""Oriented lines in hyperbolic 3-space as 2x2 matrices.

An oriented line with tail p and head q is the trace-zero matrix

    l = i / (q - p) * [[p + q, -2 p q], [2, -(p + q)]],    l^2 = -I,

whose ideal points are recovered as (l11 -/+ i) / l21.  The complex
distance from l to m along a common normal n is fixed by

    cosh D = -tr(m l) / 2,    sinh D = -(i/2) tr(m n l).

Points at infinity are represented by ``INFTY`` (complex infinity).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import asdict, dataclass

import numpy as np

from .branch_kernel import (
    Psi,
    acosh_principal,
    atanh_principal,
    canonicalize,
    clog,
    csqrt,
    half_length,
    mod_distance,
    mod_pi_distance,
    nu_of_mu,
)

INFTY = complex(math.inf, 0.0)
I2 = np.eye(2, dtype=complex)


class NotLoxodromic(ValueError):
    pass


class DegenerateLine(ValueError):
    pass


class NotNormal(ValueError):
    pass


class DegenerateConfiguration(ValueError):
    pass


def is_inf(z: complex) -> bool:
    return cmath.isinf(z)


def mat(a, b, c, d) -> np.ndarray:
    return np.array([[a, b], [c, d]], dtype=complex)


def inv(M: np.ndarray) -> np.ndarray:
    """Inverse of a unimodular matrix (adjugate)."""
    a, b = M[0]
    c, d = M[1]
    return mat(d, -b, -c, a)


def mobius(M: np.ndarray, z: complex) -> complex:
    a, b = M[0]
    c, d = M[1]
    if is_inf(z):
        return INFTY if c == 0 else a / c
    den = c * z + d
    if den == 0:
        return INFTY
    return (a * z + b) / den


def _multiplier(M: np.ndarray, z: complex) -> complex:
    a, b = M[0]
    c, d = M[1]
    if is_inf(z):
        # At infinity the local coordinate is 1/z; the multiplier is d/a.
        return d / a
    return 1.0 / (c * z + d) ** 2


def fixed_points(A: np.ndarray, allow_elliptic: bool = False) -> tuple[complex, complex]:
    """(Fix+, Fix-) of a loxodromic matrix: attracting point first.

    With A21 != 0 the points are [(A11 - A22) +- sqrt(tr^2 - 4)] / (2 A21)
    and the sign on tr * sqrt(1 - 4/tr^2) picks the attracting one.  For an
    elliptic A (only when ``allow_elliptic``) the head is the point with
    multiplier exp(-i theta), theta in (0, pi).
    """
    a, b, c, d = (complex(v) for v in A.ravel())
    tr = a + d
    elliptic = abs(tr.imag) <= 1e-14 * max(1.0, abs(tr)) and abs(tr.real) <= 2.0
    if elliptic and not allow_elliptic:
        raise NotLoxodromic(f"trace {tr} lies in [-2, 2]")
    if abs(tr * tr - 4.0) < 1e-14:
        raise NotLoxodromic("parabolic")
    scale = max(abs(a), abs(b), abs(c), abs(d), 1.0)
    if abs(c) > 1e-15 * scale:
        s = tr * csqrt(1.0 - 4.0 / (tr * tr))
        p1 = ((a - d) + s) / (2.0 * c)
        p2 = ((a - d) - s) / (2.0 * c)
    else:
        p1, p2 = INFTY, b / (d - a)
    m1 = _multiplier(A, p1)
    if abs(m1) < 1.0 - 1e-12 or (abs(abs(m1) - 1.0) <= 1e-12 and m1.imag < 0):
        return p1, p2
    return p2, p1


def line_through(p: complex, q: complex) -> np.ndarray:
    """Line matrix of the oriented geodesic from p to q."""
    if not is_inf(p) and not is_inf(q) and abs(p - q) < 1e-14 * max(1.0, abs(p), abs(q)):
        raise DegenerateLine("endpoints coincide")
    if is_inf(p) and is_inf(q):
        raise DegenerateLine("endpoints coincide")
    if is_inf(q):
        return 1j * mat(1.0, -2.0 * p, 0.0, -1.0)
    if is_inf(p):
        return 1j * mat(-1.0, 2.0 * q, 0.0, 1.0)
    return (1j / (q - p)) * mat(p + q, -2.0 * p * q, 2.0, -(p + q))


def line_ends(l: np.ndarray) -> tuple[complex, complex]:
    """(tail, head) = (Fix-, Fix+) of a line matrix."""
    l11, l12, l21 = complex(l[0, 0]), complex(l[0, 1]), complex(l[1, 0])
    if abs(l21) > 1e-15 * max(1.0, abs(l11), abs(l12)):
        return (l11 - 1j) / l21, (l11 + 1j) / l21
    if abs(l11 - 1j) < abs(l11 + 1j):
        return l12 * 1j / 2.0, INFTY
    return INFTY, -l12 * 1j / 2.0


def is_line(l: np.ndarray, tol: float = 1e-8) -> bool:
    return float(np.max(np.abs(l @ l + I2))) <= tol * max(1.0, float(np.max(np.abs(l))) ** 2)


def axis(A: np.ndarray) -> np.ndarray:
    """Naturally oriented axis a(A) as a line matrix."""
    tr = A[0, 0] + A[1, 1]
    if abs(tr) < 1e-13 and is_line(A):
        return A.copy()
    plus, minus = fixed_points(A, allow_elliptic=True)
    return line_through(minus, plus)


def complex_distance(n: np.ndarray, l: np.ndarray, m: np.ndarray, check: bool = True, tol: float = 1e-7) -> complex:
    """Delta_n(l, m) in C / 2 pi i, canonical representative."""
    if check:
        scale = max(1.0, float(np.max(np.abs(n))) * max(float(np.max(np.abs(l))), float(np.max(np.abs(m)))))
        if abs(np.trace(n @ l)) > tol * scale or abs(np.trace(n @ m)) > tol * scale:
            raise NotNormal("n is not a common normal of l and m")
    ch = -0.5 * np.trace(m @ l)
    sh = -0.5j * np.trace(m @ n @ l)
    return canonicalize(clog(complex(ch + sh)))


def normal_from_point(n: np.ndarray, p: complex) -> np.ndarray:
    """The oriented line perpendicular to n that ends at p."""
    return line_through(mobius(n, p), p)


def common_normal(l: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Oriented common normal of l and m, directed from l toward m."""
    N = l @ m - m @ l
    det = N[0, 0] * N[1, 1] - N[0, 1] * N[1, 0]
    if abs(det) < 1e-24:
        raise DegenerateConfiguration("lines share an endpoint or coincide")
    n = N / csqrt(det)
    d = complex_distance(n, l, m, check=False)
    if d.real < 0 or (abs(d.real) < 1e-14 and d.imag < 0):
        n = -n
    return n


def translation_length(K: np.ndarray) -> complex:
    """l(K) = acosh(tr(K^2)/2) with Re >= 0."""
    if float(np.max(np.abs(K - I2))) < 1e-14 or float(np.max(np.abs(K + I2))) < 1e-14:
        raise ValueError("translation length of +-I is undefined")
    return acosh_principal(0.5 * complex(np.trace(K @ K)))


def half_translation(M: np.ndarray) -> complex:
    return half_length(complex(np.trace(M)))


# -- gaps -------------------------------------------------------------------


def gap_between(A: np.ndarray, B: np.ndarray) -> complex:
    """Distance along a(BA) from the normal ending at Fix+(A) to the one ending at Fix-(B)."""
    n = axis(B @ A)
    l = normal_from_point(n, fixed_points(A)[0])
    m = normal_from_point(n, fixed_points(B)[1])
    return complex_distance(n, l, m)


def gap_closed_form(A: np.ndarray, B: np.ndarray) -> complex:
    """2 atanh( sinh(l(-BA)/2) / (cosh(l(-BA)/2) + exp(l(A)/2 + l(B)/2)) )."""
    u = half_translation(-(B @ A))
    e = cmath.exp(half_translation(A) + half_translation(B))
    return canonicalize(2.0 * atanh_principal(cmath.sinh(u) / (cmath.cosh(u) + e)))


def gap_closed_form_log(A: np.ndarray, B: np.ndarray) -> complex:
    u = half_translation(-(B @ A))
    e = cmath.exp(half_translation(A) + half_translation(B))
    return canonicalize(clog((cmath.exp(u) + e) / (cmath.exp(-u) + e)))


def gap_geometric(A: np.ndarray, B: np.ndarray) -> complex:
    """The gap of A relative to its conjugate B^-1 A^-1 B along the commutator axis."""
    Ap = inv(B) @ inv(A) @ B
    K = Ap @ A
    if abs(np.trace(K) ** 2 - 4.0) < 1e-12:
        raise DegenerateConfiguration("commutator is parabolic")
    return gap_between(A, Ap)


# -- hexagons ---------------------------------------------------------------


@dataclass
class HexagonReport:
    a_t: complex
    b_t: complex
    c_t: complex
    p_t: complex
    q_t: complex
    r_t: complex
    alpha: complex
    beta: complex
    gamma: complex
    kappa: complex
    kappa_b: complex
    kappa_c: complex
    mu: complex
    nu: complex
    factor_residual: float
    midpoint_residual: float
    # For each of gamma, alpha, beta: "2pi" if turning + pi i matches Psi mod 2 pi i,
    # "pi" if only mod pi i (the square root in Psi picked the other sheet).
    psi_classes: tuple = ()

    def to_json(self) -> dict:
        out = {}
        for k, v in asdict(self).items():
            if isinstance(v, complex):
                v = [v.real, v.imag]
            elif isinstance(v, tuple):
                v = list(v)
            out[k] = v
        return out

    @property
    def turning_sum(self) -> complex:
        return canonicalize(self.alpha + self.beta + self.gamma + 3j * math.pi)


def _mid(n: np.ndarray, l: np.ndarray, middle: np.ndarray, m: np.ndarray) -> tuple[complex, float]:
    d1 = complex_distance(n, l, middle)
    d2 = complex_distance(n, middle, m)
    return d1, abs(canonicalize(d1 - d2))


def hexagon_report(x: complex, y: complex, z: complex) -> HexagonReport:
    """Right-angled hexagon built from line matrices Q, R, P with A = -RQ, B = -PR, C = -QP."""
    from .markoff_engine import reconstruct_representation

    x, y, z = complex(x), complex(y), complex(z)
    mu = x * x + y * y + z * z - x * y * z
    if abs(mu) < 1e-12 or abs(mu - 4.0) < 1e-12:
        raise DegenerateConfiguration("mu must avoid 0 and 4")
    A, B = reconstruct_representation(x, y, z)
    R = common_normal(axis(A), axis(B))
    Q = R @ A
    P = B @ R
    C = -(Q @ P)
    factor = max(
        float(np.max(np.abs(-(R @ Q) - A))),
        float(np.max(np.abs(-(P @ R) - B))),
        float(np.max(np.abs(C @ B @ A - I2))),
    )
    RPQ, PQR, QRP = R @ P @ Q, P @ Q @ R, Q @ R @ P
    aR, aP, aQ = axis(RPQ), axis(PQR), axis(QRP)
    Nc = common_normal(aR, aP)
    Na = common_normal(aP, aQ)
    Nb = common_normal(aQ, aR)
    c_t, e1 = _mid(Nc, aR, R, aP)
    a_t, e2 = _mid(Na, aP, P, aQ)
    b_t, e3 = _mid(Nb, aQ, Q, aR)
    alpha = complex_distance(aR, Nb, Nc)
    beta = complex_distance(aP, Nc, Na)
    gamma = complex_distance(aQ, Na, Nb)
    p_t = complex_distance(axis(R @ Q), Q, R)
    q_t = complex_distance(axis(P @ R), R, P)
    r_t = complex_distance(axis(Q @ P), P, Q)
    classes = []
    for turn, args in ((gamma, (x, y, z)), (alpha, (y, z, x)), (beta, (z, x, y))):
        try:
            w = Psi(*args, mu=mu)
        except ValueError:
            classes.append("undefined")
            continue
        if mod_distance(turn + 1j * math.pi, w) < 1e-7:
            classes.append("2pi")
        elif mod_pi_distance(turn, w) < 1e-7:
            classes.append("pi")
        else:
            classes.append("none")
    return HexagonReport(
        a_t, b_t, c_t, p_t, q_t, r_t, alpha, beta, gamma,
        cmath.cosh(a_t) / cmath.cosh(p_t),
        cmath.cosh(b_t) / cmath.cosh(q_t),
        cmath.cosh(c_t) / cmath.cosh(r_t),
        mu, nu_of_mu(mu), factor, max(e1, e2, e3), tuple(classes),
    )
