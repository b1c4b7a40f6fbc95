"""Complex special functions with fixed branch conventions.

Conventions used everywhere in the package:

* ``acosh`` returns values with real part >= 0 and imaginary part in
  (-pi, pi]; on the imaginary axis the imaginary part is >= 0.
* ``log`` returns imaginary part in (-pi, pi].
* ``atanh`` returns imaginary part in (-pi/2, pi/2].
* square roots are principal (non-negative real part, positive imaginary
  part on the negative real axis).

Signed zeros are scrubbed before any branch-sensitive call, so ``-1-0j``
is treated exactly like ``-1+0j``.
"""

from __future__ import annotations

import cmath
import math

TWO_PI = 2.0 * math.pi
INTERVAL_EPS = 1e-12


class DomainError(ValueError):
    """Raised when a kernel function is evaluated at a singular point."""


def _clean(z: complex) -> complex:
    # Adding 0.0 turns -0.0 into +0.0 without touching other values.
    z = complex(z)
    return complex(z.real + 0.0, z.imag + 0.0)


def canonicalize(z: complex) -> complex:
    """Reduce ``z`` modulo 2*pi*i so that the imaginary part is in (-pi, pi]."""
    z = complex(z)
    im = math.remainder(z.imag, TWO_PI)
    if im <= -math.pi:
        im += TWO_PI
    return complex(z.real, im)


def canonicalize_pi(z: complex) -> complex:
    """Reduce ``z`` modulo pi*i so that the imaginary part is in (-pi/2, pi/2]."""
    z = complex(z)
    im = math.remainder(z.imag, math.pi)
    if im <= -math.pi / 2:
        im += math.pi
    return complex(z.real, im)


def mod_distance(a: complex, b: complex) -> float:
    """Distance between the classes of ``a`` and ``b`` in C / 2*pi*i*Z."""
    return abs(canonicalize(complex(a) - complex(b)))


def mod_pi_distance(a: complex, b: complex) -> float:
    """Distance between the classes of ``a`` and ``b`` in C / pi*i*Z."""
    return abs(canonicalize_pi(complex(a) - complex(b)))


def csqrt(z: complex) -> complex:
    return cmath.sqrt(_clean(z))


def clog(z: complex) -> complex:
    z = _clean(z)
    if z == 0:
        raise DomainError("log(0)")
    w = cmath.log(z)
    if w.imag <= -math.pi:
        w = complex(w.real, w.imag + TWO_PI)
    return w


def acosh_principal(z: complex) -> complex:
    """cosh^{-1} with Re >= 0, Im in (-pi, pi], and Im >= 0 when Re == 0."""
    w = cmath.acosh(_clean(z))
    re, im = w.real, w.imag
    if re < 0.0:
        re, im = -re, -im
    if re == 0.0 and im < 0.0:
        im = -im
    if im <= -math.pi:
        im += TWO_PI
    return complex(re + 0.0, im + 0.0)


def atanh_principal(z: complex) -> complex:
    """tanh^{-1} with Im in (-pi/2, pi/2]."""
    w = cmath.atanh(_clean(z))
    if w.imag <= -math.pi / 2:
        w = complex(w.real, w.imag + math.pi)
    return w


def in_real_interval(x: complex, bound: float = 2.0, eps: float = INTERVAL_EPS) -> bool:
    """True when ``x`` lies in [-bound, bound] up to ``eps`` in both coordinates."""
    x = complex(x)
    return abs(x.imag) <= eps and abs(x.real) <= bound + eps


def half_length(x: complex) -> complex:
    """l(x)/2 = cosh^{-1}(x/2); ``exp`` of it is lambda(x)."""
    return acosh_principal(complex(x) / 2.0)


def lam(x: complex) -> complex:
    """The eigenvalue lambda(x) = exp(l(x)/2); |lambda| >= 1."""
    return cmath.exp(half_length(x))


def h(x: complex) -> complex:
    """h(x) = (1 - sqrt(1 - 4/x^2)) / 2, the root of h^2 - h + x^-2 with smaller real part."""
    x = complex(x)
    if x == 0:
        raise DomainError("h is undefined at x = 0")
    return 0.5 * (1.0 - csqrt(1.0 - 4.0 / (x * x)))


def nu_of_mu(mu: complex) -> complex:
    return acosh_principal(1.0 - complex(mu) / 2.0)


def nu_of_tau(tau: complex) -> complex:
    return acosh_principal(-complex(tau) / 2.0)


def frak_h(tau: complex, x: complex) -> complex:
    """Gap function log((e^nu + e^l(x)) / (e^-nu + e^l(x))), principal log.

    Raises DomainError when x^2 = tau + 2, where numerator or denominator
    vanishes.
    """
    x = complex(x)
    tau = complex(tau)
    if abs(x * x - (tau + 2.0)) <= 1e-14 * max(1.0, abs(tau + 2.0)):
        raise DomainError("gap function singular at x^2 = tau + 2")
    return gap_of_nu(nu_of_tau(tau), x)


def gap_of_nu(nu: complex, x: complex) -> complex:
    """The gap function with nu given directly (no round trip through tau).

    Useful near nu = 0, where acosh(1 + small) loses half the digits.
    """
    el = lam(x) ** 2
    num = cmath.exp(nu) + el
    den = cmath.exp(-nu) + el
    if num == 0 or den == 0:
        raise DomainError("gap function singular at x^2 = tau + 2")
    return clog(num / den)


def frak_h_tanh(tau: complex, x: complex) -> complex:
    """Same gap function written as 2 atanh(sinh nu / (cosh nu + e^l(x)))."""
    nu = nu_of_tau(tau)
    el = lam(x) ** 2
    return 2.0 * atanh_principal(cmath.sinh(nu) / (cmath.cosh(nu) + el))


def frak_h_via_h(tau: complex, x: complex) -> complex:
    """Same gap function in terms of h: log((1+(e^nu-1)h) / (1+(e^-nu-1)h))."""
    nu = nu_of_tau(tau)
    hx = h(x)
    return clog((1.0 + (cmath.exp(nu) - 1.0) * hx) / (1.0 + (cmath.exp(-nu) - 1.0) * hx))


def frak_h_hat(mu: complex, x: complex) -> complex:
    """Half gap log((1 + (e^nu - 1) h(x)) / sqrt(1 - mu/x^2)); twice it is frak_h mod 2 pi i."""
    x = complex(x)
    mu = complex(mu)
    if x == 0 or abs(x * x - mu) <= 1e-14 * max(1.0, abs(mu)):
        raise DomainError("half gap undefined at x in {0, +-sqrt(mu)}")
    nu = nu_of_mu(mu)
    return clog((1.0 + (cmath.exp(nu) - 1.0) * h(x)) / csqrt(1.0 - mu / (x * x)))


def markoff_mu(x: complex, y: complex, z: complex) -> complex:
    return x * x + y * y + z * z - x * y * z


def Psi(x: complex, y: complex, z: complex, mu: complex | None = None, nu: complex | None = None) -> complex:
    """log((xy + (e^nu - 1) z) / ((x^2 - mu)^(1/2) (y^2 - mu)^(1/2))).

    ``mu`` defaults to the Markoff invariant of the triple.  Passing ``nu``
    instead fixes the sign of nu (mu is then 2 - 2 cosh nu).
    """
    x, y, z = complex(x), complex(y), complex(z)
    if nu is not None:
        mu = 2.0 - 2.0 * cmath.cosh(nu)
    elif mu is None:
        mu = markoff_mu(x, y, z)
    mu = complex(mu)
    scale = max(1.0, abs(mu))
    if abs(x * x - mu) <= 1e-14 * scale or abs(y * y - mu) <= 1e-14 * scale:
        raise DomainError("Psi needs x^2 != mu and y^2 != mu")
    if nu is None:
        nu = nu_of_mu(mu)
    num = x * y + (cmath.exp(nu) - 1.0) * z
    return clog(num / (csqrt(x * x - mu) * csqrt(y * y - mu)))


def edge_psi(x: complex, y: complex, z: complex, mu: complex) -> complex:
    """Edge weight with the head value z: log((1 + (e^nu-1) z/(xy)) / (sqrt(1-mu/x^2) sqrt(1-mu/y^2))).

    Agrees with Psi modulo pi*i; the square roots here match those of
    ``frak_h_hat`` so that branch sums close modulo 2*pi*i.
    """
    x, y, z, mu = complex(x), complex(y), complex(z), complex(mu)
    scale = max(1.0, abs(mu))
    if x == 0 or y == 0:
        raise DomainError("edge weight needs nonzero coast values")
    if abs(x * x - mu) <= 1e-14 * scale or abs(y * y - mu) <= 1e-14 * scale:
        raise DomainError("edge weight needs x^2 != mu and y^2 != mu")
    nu = nu_of_mu(mu)
    num = 1.0 + (cmath.exp(nu) - 1.0) * z / (x * y)
    return clog(num / (csqrt(1.0 - mu / (x * x)) * csqrt(1.0 - mu / (y * y))))


def H_bound(mu: complex, x: complex, eps: float = INTERVAL_EPS) -> float:
    """Neighbour bound H(x), clamped below by 2; infinite on [-2, 2] and at x = +-sqrt(mu)."""
    x, mu = complex(x), complex(mu)
    if in_real_interval(x, 2.0, eps):
        return math.inf
    if abs(x * x - mu) <= 1e-12 * max(1.0, abs(mu)):
        return math.inf
    m = abs(lam(x))
    value = math.sqrt(abs((x * x - mu) / (x * x - 4.0))) * 2.0 * m * m / (m - 1.0)
    return max(value, 2.0)


def extended(func, *args, dps: int = 40):
    """Evaluate one of the closed forms above with mpmath at ``dps`` digits.

    Only the handful of names used for regression pinning are supported.
    The mpmath branch cuts agree with the conventions above away from the
    cuts themselves.
    """
    import mpmath

    with mpmath.workdps(dps):
        a = [mpmath.mpc(v) for v in args]
        if func is acosh_principal:
            return complex(mpmath.acosh(a[0]))
        if func is half_length:
            return complex(mpmath.acosh(a[0] / 2))
        if func is h:
            return complex((1 - mpmath.sqrt(1 - 4 / a[0] ** 2)) / 2)
        if func is nu_of_mu:
            return complex(mpmath.acosh(1 - a[0] / 2))
        raise ValueError(f"no extended-precision form for {func.__name__}")
