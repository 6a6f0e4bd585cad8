"""Diffraction-integral optics of the rainbow analogy.

Airy and Pearcey catastrophe integrals, the geometric raindrop deflection
with its two bow angles, and the two-exponential model of the intensity and
rate function inside the dark band between the bows.

The Airy evaluator is self-contained (Maclaurin series in extended-precision
accumulation up to |x| = 7, asymptotic expansions beyond); the Pearcey
function integrates along the contour rotated by pi/8, which bisects the
convergence sectors of exp(i s^4 / 4).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

#: series/asymptotics switch point for the Airy evaluator
AIRY_SWITCH = 7.0

#: Pearcey evaluation window
PEARCEY_RANGE = 12.0

_AI0 = 3.0 ** (-2.0 / 3.0) / math.gamma(2.0 / 3.0)
_AIP0 = -(3.0 ** (-1.0 / 3.0)) / math.gamma(1.0 / 3.0)


class OutOfBandError(ValueError):
    """Angle outside the dark band [theta1, theta2]."""


class UnsupportedRangeError(ValueError):
    """Pearcey arguments outside the supported window."""


def _airy_series(x):
    """Maclaurin series Ai = Ai(0) f(x) + Ai'(0) g(x), longdouble accumulation.

    f'' = x f with f(0)=1, g(0)=0, g'(0)=1; term recurrences
    c_k = c_{k-1} / (3k (3k-1)) and d_k = d_{k-1} / (3k (3k+1)).
    """
    xl = np.longdouble(x)
    x3 = xl * xl * xl
    f_term = np.longdouble(1.0)
    g_term = xl
    f_sum = f_term
    g_sum = g_term
    for k in range(1, 200):
        f_term = f_term * x3 / np.longdouble(3 * k * (3 * k - 1))
        g_term = g_term * x3 / np.longdouble(3 * k * (3 * k + 1))
        f_sum += f_term
        g_sum += g_term
        if abs(f_term) < 1e-25 * max(abs(f_sum), 1.0) and abs(g_term) < 1e-25 * max(
            abs(g_sum), 1.0
        ):
            break
    return float(np.longdouble(_AI0) * f_sum + np.longdouble(_AIP0) * g_sum)


def _airy_asymptotic_pos(x):
    """Ai(x) ~ e^{-zeta} / (2 sqrt(pi) x^{1/4}) sum (-1)^k u_k zeta^{-k}."""
    zeta = (2.0 / 3.0) * x ** 1.5
    term = 1.0
    total = 1.0
    prev = abs(term)
    for k in range(1, 40):
        term *= -(6 * k - 5) * (6 * k - 1) / (72.0 * k * zeta)
        if abs(term) > prev:
            break
        total += term
        prev = abs(term)
        if prev < 1e-18 * abs(total):
            break
    return math.exp(-zeta) / (2.0 * math.sqrt(math.pi) * x ** 0.25) * total


def _airy_asymptotic_neg(x):
    """Oscillatory expansion for Ai(-x), x > 0 (DLMF 9.7.9 form)."""
    zeta = (2.0 / 3.0) * x ** 1.5
    u = 1.0
    cos_sum = 0.0
    sin_sum = 0.0
    for k in range(0, 40):
        if k:
            u *= (6 * k - 5) * (6 * k - 1) / (72.0 * k * zeta)
        if u > 1.0 and k > 2:
            break
        if k % 4 == 0:
            cos_sum += u
        elif k % 4 == 1:
            sin_sum += u
        elif k % 4 == 2:
            cos_sum -= u
        else:
            sin_sum -= u
        if abs(u) < 1e-18:
            break
    arg = zeta - 0.25 * math.pi
    return (math.cos(arg) * cos_sum + math.sin(arg) * sin_sum) / (
        math.sqrt(math.pi) * x ** 0.25
    )


#: half-width of the series/asymptotics blend zone (keeps the evaluator
#: smooth through the switch, so difference quotients stay clean)
_BLEND = 0.2


def airy(x):
    """Airy function Ai(x), absolute error below 1e-10 on [-20, 10]."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("airy requires finite x")
    ax = abs(x)
    if ax <= AIRY_SWITCH - _BLEND:
        return _airy_series(x)
    tail = _airy_asymptotic_pos(x) if x > 0 else _airy_asymptotic_neg(-x)
    if ax >= AIRY_SWITCH + _BLEND:
        return tail
    u = (ax - (AIRY_SWITCH - _BLEND)) / (2.0 * _BLEND)
    w = u * u * (3.0 - 2.0 * u)  # C^1 ramp: no curvature spikes at the edges
    return (1.0 - w) * _airy_series(x) + w * tail


def airy_first_zero():
    """Largest (least-negative) zero of Ai, by bisection of the evaluator."""
    return brentq(airy, -3.0, -2.0, xtol=1e-14)


def pearcey(x, y):
    """Cusp diffraction integral Pe(x, y) = int exp[i(s^4/4 + y s^2/2 + x s)] ds.

    The contour runs along the real axis through the stationary-point region
    and leaves into the exp(i pi/8) directions (the bisectors of the
    convergence sectors of exp(i s^4/4)), which keeps the integrand bounded
    for either sign of y.  Supported for |x|, |y| <= 12 with absolute error
    below 1e-8.
    """
    if abs(x) > PEARCEY_RANGE or abs(y) > PEARCEY_RANGE:
        raise UnsupportedRangeError(
            f"(x={x}, y={y}) outside the supported window |x|,|y| <= {PEARCEY_RANGE}"
        )
    rot = np.exp(1j * np.pi / 8.0)

    def phase(s):
        return 1j * (0.25 * s ** 4 + 0.5 * y * s ** 2 + x * s)

    R = 5.0

    def central(u):
        return np.exp(phase(u))

    def tail(v, sign):
        # both tails contribute +rot * exp(i Phi) after the substitution
        # s = sign * (R + rot v) with the orientation folded in
        s = sign * (R + rot * v)
        return rot * np.exp(phase(s))

    parts = []
    for f, a, b in ((central, -R, R),
                    (lambda v: tail(v, +1.0), 0.0, 7.0),
                    (lambda v: tail(v, -1.0), 0.0, 7.0)):
        re = quad(lambda u: f(u).real, a, b, epsabs=1e-11, epsrel=1e-12,
                  limit=500)[0]
        im = quad(lambda u: f(u).imag, a, b, epsabs=1e-11, epsrel=1e-12,
                  limit=500)[0]
        parts.append(complex(re, im))
    return parts[0] + parts[1] + parts[2]


@dataclass(frozen=True)
class RainbowParams:
    """Two-bow geometry and fold-strength constants of the intensity model."""

    n: float
    k: float
    D1: float
    D2: float
    theta1: float
    theta2: float
    c1: float = 1.0
    c2: float = 1.0

    def __post_init__(self):
        if self.n <= 1.0:
            raise ValueError("refractive index must exceed 1")
        if not self.theta1 < self.theta2:
            raise ValueError("theta1 must lie below theta2")
        if self.D1 <= 0 or self.D2 <= 0:
            raise ValueError("fold strengths must be positive")

    @classmethod
    def for_droplet(cls, n, k=1.0, D1=1.0, D2=1.0):
        t1, t2 = rainbow_angles(n)
        return cls(n=n, k=k, D1=D1, D2=D2, theta1=t1, theta2=t2)


def raindrop_deflection(h, n, order=1):
    """Viewing elevation of a ray with impact parameter h (units of radius).

    order 1: one internal reflection (primary bow family),
    order 2: two internal reflections (secondary).
    """
    if not 0.0 <= h <= 1.0:
        raise ValueError("impact parameter must lie in [0, 1]")
    i = math.asin(h)
    r = math.asin(h / n)
    if order == 1:
        return 4.0 * r - 2.0 * i
    if order == 2:
        return math.pi - (6.0 * r - 2.0 * i)
    raise ValueError("order must be 1 or 2")


def _deflection_derivative(h, n, order):
    k = 4.0 if order == 1 else 6.0
    sgn = 1.0 if order == 1 else -1.0
    di = 1.0 / math.sqrt(1.0 - h * h)
    dr = 1.0 / (n * math.sqrt(1.0 - (h / n) ** 2))
    return sgn * (k * dr - 2.0 * di)


def rainbow_angles(n):
    """(theta1, theta2): extremal viewing angles of the two bow families.

    theta1 is the maximum of the order-1 deflection, theta2 the minimum of
    order 2; the stationary impact parameters satisfy h^2 = (4 - n^2)/3 and
    (9 - n^2)/8, recovered here by root-finding the derivative.
    """
    if not 1.0 < n < 2.0:
        raise ValueError("refractive index must lie in (1, 2)")
    out = []
    for order in (1, 2):
        h_star = brentq(
            _deflection_derivative, 1e-9, 1.0 - 1e-12, args=(n, order), xtol=1e-14
        )
        out.append(raindrop_deflection(h_star, n, order))
    t1, t2 = out
    return t1, t2


def _exponents(theta, params):
    e1 = (2.0 * params.k / 3.0) * params.D1 ** 1.5 * (theta - params.theta1) ** 1.5
    e2 = (2.0 * params.k / 3.0) * params.D2 ** 1.5 * (params.theta2 - theta) ** 1.5
    return e1, e2


def dark_band_intensity(theta, params):
    """Two-tail intensity |c1 e^{-e1} + c2 e^{-e2}|^2 inside the band."""
    if not params.theta1 <= theta <= params.theta2:
        raise OutOfBandError(
            f"theta={theta} outside [{params.theta1}, {params.theta2}]"
        )
    e1, e2 = _exponents(theta, params)
    return abs(params.c1 * math.exp(-e1) + params.c2 * math.exp(-e2)) ** 2


def dark_band_rate(theta, params):
    """(r(theta), theta_star): k -> infinity rate and the switching angle.

    r is the smaller of the two fold exponents (per unit k); theta_star
    solves their equality, located by bisection.
    """
    if not params.theta1 <= theta <= params.theta2:
        raise OutOfBandError(
            f"theta={theta} outside [{params.theta1}, {params.theta2}]"
        )

    def diff(th):
        return params.D1 ** 1.5 * (th - params.theta1) ** 1.5 - params.D2 ** 1.5 * (
            params.theta2 - th
        ) ** 1.5

    theta_star = brentq(diff, params.theta1, params.theta2, xtol=1e-14)
    r1 = (2.0 / 3.0) * params.D1 ** 1.5 * (theta - params.theta1) ** 1.5
    r2 = (2.0 / 3.0) * params.D2 ** 1.5 * (params.theta2 - theta) ** 1.5
    return min(r1, r2), theta_star
