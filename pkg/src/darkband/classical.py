"""Classical limit on the spherical phase space.

Canonical pair: position phi in [0, 2pi), momentum eta = m/j in [-1, 1].
The default Hamiltonian (literal classical limit of the quantum model) is

    H(phi, eta) = (G/2) eta^2 + Omega sqrt(1 - eta^2) cos(phi).

The alternative printed sign of the interaction term is exposed through the
``legacy_sign`` flag, which is equivalent to negating G.

Trajectory integration runs on the embedded unit sphere (x, y, z):

    xdot = -G y z,   ydot = G x z - Omega z,   zdot = Omega y,

which is polynomial and regular at the coordinate poles |eta| -> 1 where the
chart equations of motion blow up.  Chart output wraps phi to [0, 2pi).
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

TWO_PI = 2.0 * np.pi

#: chart equations are refused this close to the coordinate poles
POLE_MARGIN = 1e-12


class PoleError(ValueError):
    """Chart singularity at |eta| -> 1."""

    def __init__(self, eta, where=""):
        self.eta = eta
        super().__init__(f"coordinate pole: |eta|={abs(eta)!r} too close to 1 {where}")


class ResolutionError(ValueError):
    """Fold scan cannot isolate stationary points at this sampling."""


@dataclass(frozen=True)
class PhasePoint:
    phi: float
    eta: float

    def __post_init__(self):
        if abs(self.eta) > 1.0:
            raise ValueError(f"|eta| = {abs(self.eta)} exceeds 1")


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution of Hamilton's equations at fixed energy."""

    times: np.ndarray
    points: list
    energy: float


def effective_g(G, legacy_sign=False):
    """Interaction coupling with the alternative printed sign folded in."""
    return -G if legacy_sign else G


def classical_energy(p, G, Omega, legacy_sign=False):
    """Energy per particle, epsilon = (G/2) eta^2 + Omega sqrt(1-eta^2) cos phi."""
    g = effective_g(G, legacy_sign)
    return 0.5 * g * p.eta ** 2 + Omega * np.sqrt(1.0 - p.eta ** 2) * np.cos(p.phi)


def energy_minimum(G, Omega):
    """Global minimum of the default-sign Hamiltonian (at (pi, 0) for Omega>0)."""
    return -abs(Omega)


def energy_maximum(G, Omega):
    """Global maximum: Omega for Omega >= G, else G/2 + Omega^2/(2G)."""
    if Omega >= G:
        return Omega
    return 0.5 * G + 0.5 * Omega ** 2 / G


def flow_rhs(p, G, Omega, legacy_sign=False):
    """(dphi/dt, deta/dt) from Hamilton's equations in the chart.

    Refuses points within POLE_MARGIN of the coordinate poles; trajectory
    integration does not use this form (see module docstring).
    """
    if abs(p.eta) >= 1.0 - POLE_MARGIN:
        raise PoleError(p.eta, "in flow_rhs")
    g = effective_g(G, legacy_sign)
    root = np.sqrt(1.0 - p.eta ** 2)
    dphi = g * p.eta - Omega * p.eta * np.cos(p.phi) / root
    deta = Omega * root * np.sin(p.phi)
    return dphi, deta


def _xyz_rhs(G, Omega):
    def rhs(t, r):
        x, y, z = r
        return (-G * y * z, G * x * z - Omega * z, Omega * y)

    return rhs


def bloch_xyz(p):
    """Unit Bloch vector (x, y, z) of a chart point; z = eta."""
    root = np.sqrt(max(0.0, 1.0 - p.eta ** 2))
    return (root * np.cos(p.phi), root * np.sin(p.phi), p.eta)


def _to_chart(x, y, z):
    return np.arctan2(y, x) % TWO_PI, z


def _solve_sphere(p0, t_span, G, Omega, tol, t_eval=None, events=None,
                  legacy_sign=False):
    g = effective_g(G, legacy_sign)
    r0 = bloch_xyz(p0)
    sol = solve_ivp(
        _xyz_rhs(g, Omega),
        t_span,
        r0,
        method="RK45",
        rtol=max(tol * 1e-2, 1e-13),
        atol=max(tol * 1e-3, 1e-14),
        dense_output=True,
        t_eval=t_eval,
        events=events,
        max_step=0.2 / max(abs(g), abs(Omega), 1e-12),
    )
    if not sol.success:  # pragma: no cover - RK45 on a smooth compact flow
        raise RuntimeError(f"integration failed: {sol.message}")
    return sol


def integrate(p0, t_end, tol=1e-10, G=1.0, Omega=1.0, n_samples=400,
              legacy_sign=False):
    """Trajectory from ``p0`` over [0, t_end] with monitored energy drift.

    Samples ``n_samples`` points uniformly; phi is wrapped to [0, 2pi).
    The returned energy is the initial one; the drift max|eps(t) - eps(0)|
    is checked against ``tol`` and raised as RuntimeError when violated
    (the sphere flow is not stiff, so this indicates a tolerance misuse).
    """
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    t_eval = np.linspace(0.0, t_end, n_samples)
    sol = _solve_sphere(p0, (0.0, t_end), G, Omega, tol, t_eval=t_eval,
                        legacy_sign=legacy_sign)
    x, y, z = sol.y
    e0 = classical_energy(p0, G, Omega, legacy_sign)
    g = effective_g(G, legacy_sign)
    energies = 0.5 * g * z ** 2 + Omega * x
    drift = float(np.max(np.abs(energies - e0)))
    if drift > tol:
        raise RuntimeError(f"energy drift {drift:.2e} exceeds tolerance {tol:.2e}")
    pts = [PhasePoint(*_to_chart(xi, yi, zi)) for xi, yi, zi in zip(x, y, z)]
    return Trajectory(times=t_eval, points=pts, energy=e0)


def ensemble(eta0, n_traj, times, G=1.0, Omega=1.0, tol=1e-10, legacy_sign=False):
    """eta(t; phi0) snapshots for phi0 uniform over [0, 2pi).

    Returns (phi0_values, eta_grid, phi_grid) with eta_grid[i, k] the momentum
    of trajectory k at times[i] (phi_grid likewise).  Members are integrated
    independently; results are ordered by the phi0 index.
    """
    if n_traj < 8:
        raise ValueError("n_traj must be at least 8")
    times = np.asarray(times, dtype=float)
    phi0 = TWO_PI * np.arange(n_traj) / n_traj
    etas = np.empty((len(times), n_traj))
    phis = np.empty((len(times), n_traj))
    t_end = float(times[-1])
    for k, p in enumerate(phi0):
        start = PhasePoint(p, eta0)
        if t_end == 0.0:
            phis[:, k], etas[:, k] = p, eta0
            continue
        sol = _solve_sphere(start, (0.0, t_end), G, Omega, tol,
                            t_eval=times, legacy_sign=legacy_sign)
        x, y, z = sol.y
        phis[:, k] = np.arctan2(y, x) % TWO_PI
        etas[:, k] = z
    return phi0, etas, phis


@dataclass(frozen=True)
class FoldPoint:
    """Stationary value of the projection eta(phi0) at fixed time."""

    eta_star: float
    phi0_star: float
    is_cusp: bool


def detect_folds(phi0, snapshot, cusp_tol=0.02, degenerate_tol=1e-12):
    """Fold caustics of one snapshot: values eta* where d(eta)/d(phi0) = 0.

    ``snapshot`` is eta over the periodic phi0 grid.  Each sign change of the
    finite-difference derivative is refined by a local quadratic fit.  A fold
    is flagged as a cusp candidate when a second stationary point coalesces
    with it (pair separation below ``cusp_tol`` in eta and one radian in
    phi0) - the finite-resolution form of a vanishing second derivative at
    the stationary point.  A constant snapshot is degenerate and returns
    ([], True).  Sign changes closer than two samples raise
    :class:`ResolutionError` (increase n_traj).
    """
    eta = np.asarray(snapshot, dtype=float)
    n = len(eta)
    if n < 8:
        raise ResolutionError("need at least 8 samples")
    if np.max(eta) - np.min(eta) <= degenerate_tol:
        return [], True
    h = TWO_PI / n
    d1 = (np.roll(eta, -1) - np.roll(eta, 1)) / (2 * h)
    signs = np.sign(d1)
    signs[signs == 0] = 1.0
    flips = np.nonzero(signs != np.roll(signs, -1))[0]
    if len(flips) >= 2:
        gaps = np.diff(np.sort(flips))
        wrap_gap = n - (np.max(flips) - np.min(flips))
        if np.min(np.append(gaps, wrap_gap)) < 2:
            raise ResolutionError(
                f"stationary points closer than 2 samples at n={n}; increase n_traj"
            )
    folds = []
    for i0 in flips:
        # the flip lies between samples i0 and i0+1; center on the flatter one
        i1 = (i0 + 1) % n
        i = i0 if abs(d1[i0]) <= abs(d1[i1]) else i1
        im, ip = (i - 1) % n, (i + 1) % n
        # quadratic through (t-h, t, t+h) centered on the flip sample
        y0, y1, y2 = eta[im], eta[i], eta[ip]
        denom = y0 - 2 * y1 + y2
        if denom == 0.0:
            offset = 0.5
            eta_star = max(y1, y2)
        else:
            offset = 0.5 * (y0 - y2) / denom
            offset = float(np.clip(offset, -1.0, 1.0))
            eta_star = y1 - 0.25 * (y0 - y2) * offset
        folds.append(
            FoldPoint(
                eta_star=float(eta_star),
                phi0_star=float((phi0[i] + offset * h) % TWO_PI),
                is_cusp=False,
            )
        )
    # cusp candidates: stationary points coalescing in both eta and phi0
    flagged = [False] * len(folds)
    for a in range(len(folds)):
        for b in range(a + 1, len(folds)):
            d_eta = abs(folds[a].eta_star - folds[b].eta_star)
            d_phi = abs(
                (folds[a].phi0_star - folds[b].phi0_star + np.pi) % TWO_PI - np.pi
            )
            if d_eta < cusp_tol and d_phi < 1.0:
                flagged[a] = flagged[b] = True
    folds = [
        FoldPoint(f.eta_star, f.phi0_star, is_cusp=flagged[i])
        for i, f in enumerate(folds)
    ]
    return folds, False


def envelope_max(eta0, t, G=1.0, Omega=1.0, tol=1e-11, n_seed=64):
    """max over phi0 of eta(t; phi0): the upper classical envelope at time t."""
    phi0, etas, _ = ensemble(eta0, n_seed, [0.0, t], G, Omega, tol)
    k = int(np.argmax(etas[-1]))
    lo = phi0[(k - 1) % n_seed]
    hi = phi0[(k + 1) % n_seed]
    if hi < lo:
        hi += TWO_PI

    def eta_at(p):
        sol = _solve_sphere(PhasePoint(p % TWO_PI, eta0), (0.0, t), G, Omega, tol,
                            t_eval=[t])
        return sol.y[2][-1]

    # golden-section maximization on the bracketing arc
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = eta_at(c), eta_at(d)
    for _ in range(60):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = eta_at(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = eta_at(d)
        if b - a < 1e-10:
            break
    return max(fc, fd)
