"""Semiclassical action machinery for the collective spin model.

Reduced action, round-trip action with the compact-phase-space branch rule,
Bohr-Sommerfeld levels, the energy-dependent return time T(eps) for the two
short-time trajectory classes, stationary-phase energies and caustic times.

Geometry (default sign convention, Omega >= G): orbits with eps > G/2 are
loops around the energy maximum at (phi, eta) = (0, 0) and turn in eta where
phi = 0; orbits with eps < G/2 loop around the minimum at (pi, 0) and turn
where phi = pi.  At eps = G/2 the orbit threads both coordinate poles, where
the (phi, eta) chart - and plain WKB in the Fock variable - degrades; a small
window around G/2 is therefore flagged approximate.

All turning-point quadratures substitute eta = eta_top - v^2, which removes
the square-root behaviour and makes fixed-order Gauss-Legendre accurate to
~1e-12 away from the flagged window.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import classical

#: half-width of the flagged window around eps = G/2 (units of G)
SEPARATRIX_WINDOW = 1e-3

#: Gauss-Legendre order for the regularized quadratures
_GL_NODES = 160

_gl_x, _gl_w = np.polynomial.legendre.leggauss(_GL_NODES)
_gl_x = 0.5 * (_gl_x + 1.0)  # map to [0, 1]
_gl_w = 0.5 * _gl_w


class ForbiddenRegionError(ValueError):
    """(eps, eta) lies outside the classically allowed region."""


class BranchError(ValueError):
    """Unsupported (l, k) trajectory class."""


@dataclass(frozen=True)
class ActionBranch:
    """Short-time trajectory class: k = 0 returns over the upper turning
    point (l = +1), k = 1 over the lower one (l = -1)."""

    k: int
    l: int
    eta0: float

    def __post_init__(self):
        if (self.l, self.k) not in ((1, 0), (-1, 1)):
            raise BranchError(f"unsupported class (l={self.l}, k={self.k})")
        if not -1.0 < self.eta0 < 1.0:
            raise ValueError("eta0 must lie strictly inside (-1, 1)")

    @classmethod
    def k0(cls, eta0):
        return cls(k=0, l=1, eta0=eta0)

    @classmethod
    def k1(cls, eta0):
        return cls(k=1, l=-1, eta0=eta0)


def energy_window(eta0, G, Omega):
    """(eps_lo, eps_hi) reachable from latitude eta0: |cos phi| <= 1 there."""
    c = 0.5 * G * eta0 ** 2
    r = Omega * np.sqrt(1.0 - eta0 ** 2)
    return c - r, c + r


@dataclass(frozen=True)
class EnergyGrid:
    """Increasing per-particle energies inside the window of a latitude."""

    eps: np.ndarray
    eta0: float

    def __post_init__(self):
        eps = np.asarray(self.eps, dtype=float)
        if np.any(np.diff(eps) <= 0):
            raise ValueError("energies must be strictly increasing")
        object.__setattr__(self, "eps", eps)

    @classmethod
    def for_latitude(cls, eta0, n, G, Omega, margin=1e-3):
        lo, hi = energy_window(eta0, G, Omega)
        pad = margin * (hi - lo)
        return cls(np.linspace(lo + pad, hi - pad, n), eta0)


def _check_domain(G, Omega):
    if G <= 0 or Omega <= 0:
        raise ValueError("G and Omega must be positive")
    if Omega < G:
        raise ValueError(
            "action branch formulas implemented for Omega >= G "
            "(single-well topology); got Omega < G"
        )


def cos_angle(eps, eta, G, Omega):
    """cos(phi) on the energy shell: (eps - G eta^2/2)/(Omega sqrt(1-eta^2))."""
    return (eps - 0.5 * G * eta ** 2) / (Omega * np.sqrt(1.0 - eta ** 2))


def momentum_branch(eps, eta, G, Omega):
    """Principal-branch angle phi(eps, eta) in [0, pi]; -phi is the caller's.

    Raises ForbiddenRegionError outside |cos phi| <= 1 (complex continuation
    lives in :mod:`darkband.complexmech`).
    """
    u = cos_angle(eps, eta, G, Omega)
    if abs(u) > 1.0 + 1e-12:
        raise ForbiddenRegionError(
            f"(eps={eps}, eta={eta}) is classically forbidden (|cos phi|={abs(u):.6f})"
        )
    return float(np.arccos(np.clip(u, -1.0, 1.0)))


def turning_point(eps, G, Omega):
    """Positive latitude eta* where phi = 0: eps = (G/2) eta*^2 + Omega sqrt(1-eta*^2).

    Defined for eps between G/2 (pole) and the phi = 0 ridge maximum.
    """
    _check_domain(G, Omega)

    def g0(eta):
        return 0.5 * G * eta ** 2 + Omega * np.sqrt(1.0 - eta ** 2) - eps

    lo, hi = g0(0.0), g0(1.0)
    if not (min(lo, hi) <= 0.0 <= max(lo, hi)):
        raise ValueError(f"no phi=0 turning point in [0,1] for eps={eps}")
    if eps >= Omega:  # hit the ridge top exactly (g0(0) <= 0 only at eps >= Omega)
        if abs(eps - Omega) <= 1e-14 * max(1.0, Omega):
            return 0.0
    return brentq(g0, 0.0, 1.0, xtol=1e-15, rtol=8.9e-16)


def _upper_turning(eps, G, Omega):
    """Largest latitude of the eps-orbit and the turning-point type.

    Returns (eta_top, at_phi_pi).  For eps > G/2 the turning is at phi = 0,
    below at phi = pi; at eps = G/2 the orbit reaches the pole eta = 1.
    """
    half_g = 0.5 * G
    if eps >= half_g:
        if abs(eps - half_g) < 1e-15:
            return 1.0, False

        def g0(eta):
            return half_g * eta ** 2 + Omega * np.sqrt(1.0 - eta ** 2) - eps

        if g0(0.0) <= 0.0:
            raise ValueError(f"eps={eps} above the spectrum top")
        return brentq(g0, 0.0, 1.0, xtol=1e-15, rtol=8.9e-16), False

    def gpi(eta):
        return half_g * eta ** 2 - Omega * np.sqrt(1.0 - eta ** 2) - eps

    if gpi(0.0) >= 0.0:
        raise ValueError(f"eps={eps} below the spectrum bottom")
    return brentq(gpi, 0.0, 1.0, xtol=1e-15, rtol=8.9e-16), True


def _turning_quad(eps, eta_from, G, Omega, integrand):
    """integral_{eta_from}^{eta_top} f(eta) d eta with eta = eta_top - v^2.

    ``integrand(u_values, eta_values)`` receives clipped cos(phi) samples.
    """
    eta_top, _ = _upper_turning(eps, G, Omega)
    if eta_from > eta_top + 1e-13:
        raise ForbiddenRegionError(
            f"eta={eta_from} above the turning latitude {eta_top} at eps={eps}"
        )
    span = max(eta_top - eta_from, 0.0)
    if span == 0.0:
        return 0.0
    vmax = np.sqrt(span)
    v = _gl_x * vmax
    eta = eta_top - v ** 2
    np.clip(eta, -1.0 + 1e-300, 1.0 - 1e-300, out=eta)
    u = cos_angle(eps, eta, G, Omega)
    vals = integrand(np.clip(u, -1.0, 1.0), eta) * 2.0 * v
    return float(np.sum(vals * _gl_w) * vmax)


def reduced_action(eps, eta, G, Omega):
    """S(eps, eta) = integral from the phi = 0 turning point eta* down to eta
    of the principal-branch angle.  Negative for eta < eta*; S(eps, eta*) = 0.

    Defined on the upper-well branch eps >= G/2 where the phi = 0 turning
    point exists; use :func:`reduced_action_ext` for the continuation below.
    """
    _check_domain(G, Omega)
    if eps < 0.5 * G:
        raise ForbiddenRegionError(
            f"no phi=0 turning point for eps={eps} < G/2; see reduced_action_ext"
        )
    return reduced_action_ext(eps, eta, G, Omega)


def reduced_action_ext(eps, eta, G, Omega):
    """Branch-aware reduced action from the orbit's upper turning latitude.

    For eps >= G/2 the integrand is phi = arccos(u); below it is phi - pi,
    which removes the nonzero boundary angle at the phi = pi turning point so
    that d/d eps of the result is half the classical return time on both
    sides.
    """
    _check_domain(G, Omega)
    _, at_pi = _upper_turning(eps, G, Omega)
    if at_pi:
        f = lambda u, _eta: np.arccos(u) - np.pi
    else:
        f = lambda u, _eta: np.arccos(u)
    return -_turning_quad(eps, eta, G, Omega, f)


def round_trip_action(eps, G, Omega):
    """Oriented phase-space area S(eps) of the closed orbit, in (0, 4pi).

    Increases monotonically from 0 at the spectrum bottom to 4pi at the top;
    continuous across eps = G/2 where the two branch formulas meet:

        eps <= G/2 :  S = 4 * int_0^{eta_b} (pi - arccos u) d eta
        eps >= G/2 :  S = 4pi - 4 * int_0^{eta*} arccos(u) d eta
    """
    _check_domain(G, Omega)
    lo = -Omega
    hi = classical.energy_maximum(G, Omega)
    if not lo <= eps <= hi:
        raise ValueError(f"eps={eps} outside the spectrum range [{lo}, {hi}]")
    _, at_pi = _upper_turning(eps, G, Omega)
    if at_pi:
        area = _turning_quad(eps, 0.0, G, Omega, lambda u, _e: np.pi - np.arccos(u))
        return 4.0 * area
    area = _turning_quad(eps, 0.0, G, Omega, lambda u, _e: np.arccos(u))
    return 4.0 * np.pi - 4.0 * area


def _time_half(eps, eta_from, G, Omega):
    """integral_{eta_from}^{eta_top} d eta / |eta_dot| (one-way travel time)."""

    def f(u, eta):
        s2 = np.maximum(1.0 - u ** 2, 1e-300)
        return 1.0 / (Omega * np.sqrt(1.0 - eta ** 2) * np.sqrt(s2))

    return _turning_quad(eps, eta_from, G, Omega, f)


def orbit_period(eps, G, Omega):
    """Round-trip period of the eps-orbit (= dS/d eps)."""
    return 4.0 * _time_half(eps, 0.0, G, Omega)


def return_time(eps, branch, G, Omega, eta_target=None):
    """T(eps): travel time of the class-k trajectory from eta0 to eta_target.

    With the default eta_target = eta0 this is the classical return time:
    k = 0 travels up through the orbit's top turning point and back, k = 1
    goes the other way around (period minus the k = 0 time).  Evaluated from
    the regularized period-type integrals; equals the eps-derivative of
    2 l S(eps, eta0) + k S(eps), which tests cross-check by finite
    differences.
    """
    _check_domain(G, Omega)
    eta_t = branch.eta0 if eta_target is None else eta_target
    lo, hi = _shared_window(branch.eta0, eta_t, G, Omega)
    if not lo <= eps <= hi:
        raise ValueError(
            f"eps={eps} outside the window [{lo}, {hi}] of (eta0={branch.eta0}, "
            f"eta_target={eta_t})"
        )
    if branch.k == 0:
        return _time_half(eps, branch.eta0, G, Omega) + _time_half(
            eps, eta_t, G, Omega
        )
    return _time_half(eps, -branch.eta0, G, Omega) + _time_half(
        eps, -eta_t, G, Omega
    )


def _shared_window(eta0, eta_target, G, Omega):
    lo0, hi0 = energy_window(eta0, G, Omega)
    lo1, hi1 = energy_window(eta_target, G, Omega)
    return max(lo0, lo1), min(hi0, hi1)


def return_time_fd(eps, branch, G, Omega, h=1e-5):
    """T(eps) as the central finite difference of the action combination,
    with one Richardson step; the cross-check route for :func:`return_time`.
    """

    def s_branch(e):
        s = 2.0 * branch.l * reduced_action_ext(e, branch.eta0, G, Omega)
        if branch.k:
            s += branch.k * round_trip_action(e, G, Omega)
        return s

    def central(hh):
        return (s_branch(eps + hh) - s_branch(eps - hh)) / (2.0 * hh)

    d1 = central(h)
    d2 = central(0.5 * h)
    return (4.0 * d2 - d1) / 3.0


@dataclass(frozen=True)
class StationaryEnergy:
    eps: float
    degenerate: bool = False


@dataclass(frozen=True)
class CausticInfo:
    """Extremum of T(eps): the fold time and the coalescing energy."""

    time: float
    eps: float
    branch: ActionBranch


def _window_margins(branch, G, Omega, eta_target=None, margin=1e-6):
    eta_t = branch.eta0 if eta_target is None else eta_target
    lo, hi = _shared_window(branch.eta0, eta_t, G, Omega)
    pad = margin * (hi - lo)
    return lo + pad, hi - pad


def caustic_times(branch, G, Omega, eta_target=None, n_scan=160):
    """Interior extremum of T(eps): maximum for k = 0, minimum for k = 1.

    Returns a :class:`CausticInfo`.  For the default eta_target = eta0, the
    k = 0 maximum is the first caustic time t1 and the k = 1 minimum the
    second caustic time t2 (t1 < t2 for the model's short-time geometry);
    other targets give the fold times of the corresponding Fock latitude.
    """
    lo, hi = _window_margins(branch, G, Omega, eta_target)
    eps_grid = np.linspace(lo, hi, n_scan)
    T = np.array([return_time(e, branch, G, Omega, eta_target) for e in eps_grid])
    sign = 1.0 if branch.k == 0 else -1.0
    i = int(np.argmax(sign * T))
    a = eps_grid[max(i - 1, 0)]
    b = eps_grid[min(i + 1, n_scan - 1)]
    # golden-section refinement of the extremum
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = sign * return_time(c, branch, G, Omega, eta_target)
    fd = sign * return_time(d, branch, G, Omega, eta_target)
    while b - a > 1e-10:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = sign * return_time(c, branch, G, Omega, eta_target)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = sign * return_time(d, branch, G, Omega, eta_target)
    eps_star = 0.5 * (a + b)
    return CausticInfo(
        time=return_time(eps_star, branch, G, Omega, eta_target),
        eps=eps_star,
        branch=branch,
    )


def stationary_energies(t, branch, G, Omega, eta_target=None, n_scan=400,
                        caustic_tol=1e-9, caustic=None):
    """All eps with T(eps) = t for the branch: the stationary-phase condition.

    Empty inside the branch's dark region; two solutions in its bright
    window; a single flagged entry when t sits at the caustic within
    ``caustic_tol``.  A precomputed :class:`CausticInfo` may be passed to
    avoid re-deriving the extremum.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    info = caustic if caustic is not None else caustic_times(branch, G, Omega, eta_target)
    sign = 1.0 if branch.k == 0 else -1.0
    if sign * t > sign * info.time:
        return []
    if abs(t - info.time) <= caustic_tol:
        return [StationaryEnergy(eps=info.eps, degenerate=True)]
    lo, hi = _window_margins(branch, G, Omega, eta_target)
    roots = []
    for a, b in ((lo, info.eps), (info.eps, hi)):
        grid = np.linspace(a, b, n_scan // 2)
        vals = np.array([return_time(e, branch, G, Omega, eta_target) - t for e in grid])
        for i in np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]:
            r = brentq(
                lambda e: return_time(e, branch, G, Omega, eta_target) - t,
                grid[i],
                grid[i + 1],
                xtol=1e-12,
            )
            roots.append(StationaryEnergy(eps=float(r)))
    roots.sort(key=lambda s: s.eps)
    return roots


@dataclass(frozen=True)
class BSLevel:
    n: int
    eps: float
    near_separatrix: bool
    bracket_failed: bool = False


def bohr_sommerfeld(space, G, Omega):
    """WKB levels: j S(eps_n) = 2 pi (n + 1/2), n = 0, 1, ...

    Root-finds the monotone round-trip action; levels whose target falls
    outside the attainable action range are flagged (not fatal), as are
    levels inside the eps = G/2 window.  At most ``space.dim`` levels.
    """
    j = space.j
    if j < 5:
        raise ValueError("semiclassical regime requires j >= 5")
    _check_domain(G, Omega)
    lo = -Omega + 1e-12
    hi = classical.energy_maximum(G, Omega) - 1e-12
    s_lo = round_trip_action(lo, G, Omega)
    s_hi = round_trip_action(hi, G, Omega)
    levels = []
    for n in range(space.dim):
        target = 2.0 * np.pi * (n + 0.5) / j
        if not s_lo < target < s_hi:
            if target < 4.0 * np.pi:
                levels.append(BSLevel(n, float("nan"), False, bracket_failed=True))
            continue
        eps_n = brentq(
            lambda e: round_trip_action(e, G, Omega) - target, lo, hi, xtol=1e-13
        )
        levels.append(
            BSLevel(
                n,
                float(eps_n),
                near_separatrix=abs(eps_n - 0.5 * G) < SEPARATRIX_WINDOW * G,
            )
        )
    return levels
