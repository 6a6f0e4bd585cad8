"""Two-dimensional (t, eta) rate analysis and transition location.

Exact rate surfaces come from the Fock map; semiclassical branch surfaces
from per-latitude saddle continuations.  The switching line is the zero
contour of the branch-rate difference inside the doubly forbidden region,
and its intersection with the initial latitude is the transition time,
located here by bisection on the branch-rate difference.
"""

from dataclasses import dataclass

import numpy as np

from . import complexmech, dicke, wkb

#: exact-surface amplitudes below this are treated as numerically dark
AMP_FLOOR = 1e-13


@dataclass(frozen=True)
class RateSurface:
    """Rate values on a (t, eta) grid; nan marks masked cells."""

    times: np.ndarray
    etas: np.ndarray
    r: np.ndarray  # shape (len(etas), len(times))
    source: str

    def __post_init__(self):
        if self.r.shape != (len(self.etas), len(self.times)):
            raise ValueError("rate grid shape mismatch")


def rate_surface_exact(cfg):
    """r(t, m/j) = -(1/j) ln |<j,m|psi(t)>|^2 from exact dynamics.

    Amplitudes below the floating-point noise floor are masked (nan): the
    exact map cannot resolve rates beyond -2 ln(AMP_FLOOR)/j.
    """
    amps = dicke.fock_map(cfg)
    j = cfg.space.j
    etas = cfg.space.m_values() / j
    with np.errstate(divide="ignore"):
        r = -2.0 * np.log(np.where(amps > AMP_FLOOR, amps, np.nan)) / j
    return RateSurface(times=cfg.times, etas=etas, r=r, source=f"exact(j={j:g})")


def branch_rate_surface(branch, t_grid, eta_grid, eta0=None, G=1.0, Omega=1.0,
                        tol=1e-9, workers=1):
    """r_k(t, eta) = 2 Im(action) of the class-k saddle returning to eta.

    One continuation in t per target latitude; rows with no shared energy
    window or broken continuation are masked cell-wise.  The default
    tolerance is looser than the single-latitude work (surface cells need
    ~1e-6 in the rate, not 1e-10).  ``workers`` > 1 distributes rows over
    processes (rows are independent; assembly is deterministic by row index).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    eta_grid = np.asarray(eta_grid, dtype=float)
    if eta0 is not None and abs(eta0 - branch.eta0) > 1e-12:
        branch = wkb.ActionBranch(k=branch.k, l=branch.l, eta0=float(eta0))
    args = [(branch, t_grid, float(eta_t), G, Omega, tol) for eta_t in eta_grid]
    if workers > 1:
        import multiprocessing as mp

        with mp.Pool(workers) as pool:
            rows = pool.map(_surface_row, args)
    else:
        rows = [_surface_row(a) for a in args]
    r = np.vstack(rows)
    return RateSurface(times=t_grid, etas=eta_grid, r=r,
                       source=f"semiclassical-branch(k={branch.k})")


def _surface_row(packed):
    branch, t_grid, eta_t, G, Omega, tol = packed
    row = np.full(len(t_grid), np.nan)
    if abs(eta_t) >= 1.0:
        return row
    lo, hi = wkb._shared_window(branch.eta0, eta_t, G, Omega)
    if hi - lo < 1e-6:
        return row
    try:
        cont = complexmech.continue_branch(branch, t_grid, eta_target=eta_t,
                                           G=G, Omega=Omega, tol=tol,
                                           model_stride=5)
    except (ValueError, RuntimeError):
        return row
    darkward = 1 if branch.k == 0 else -1
    for i, sol in enumerate(cont.solutions):
        if sol is None or not sol.converged:
            continue
        if darkward * (t_grid[i] - cont.caustic.time) > 0:
            row[i] = max(2.0 * sol.action.imag, 0.0)
        else:
            row[i] = 0.0
    return row


def switching_line(surf0, surf1):
    """Zero contour of r0 - r1 inside the doubly forbidden region.

    Scans each time column for sign changes of the difference over cells
    where both branch rates are positive, interpolating linearly in eta.
    Returns an array of (t, eta) points ordered by t (empty if the masked
    domains do not overlap).
    """
    if not (np.array_equal(surf0.times, surf1.times)
            and np.array_equal(surf0.etas, surf1.etas)):
        raise ValueError("surfaces must share their grids")
    pts = []
    d = surf0.r - surf1.r
    valid = (surf0.r > 1e-12) & (surf1.r > 1e-12) & np.isfinite(d)
    for col, t in enumerate(surf0.times):
        v = valid[:, col]
        for i in range(len(surf0.etas) - 1):
            if not (v[i] and v[i + 1]):
                continue
            a, b = d[i, col], d[i + 1, col]
            if a == 0.0:
                pts.append((t, surf0.etas[i]))
            elif a * b < 0:
                frac = a / (a - b)
                eta = surf0.etas[i] + frac * (surf0.etas[i + 1] - surf0.etas[i])
                pts.append((t, float(eta)))
    return np.array(pts).reshape(-1, 2)


@dataclass(frozen=True)
class DPTResult:
    t_c: float
    rate: float
    found: bool


def locate_dpt(eta0, G=1.0, Omega=1.0, tol=complexmech.DEFAULT_TOL,
               t_bracket=None, xtol=1e-8):
    """Transition time: root of r0(t) - r1(t) between the caustic times.

    Bisection with fresh saddle solves at each midpoint, seeded by
    continuation from the caustics; returns found=False when the branch
    rates do not cross inside the dark band (no transition).
    """
    b0 = wkb.ActionBranch.k0(eta0)
    b1 = wkb.ActionBranch.k1(eta0)
    c0 = wkb.caustic_times(b0, G, Omega)
    c1 = wkb.caustic_times(b1, G, Omega)
    if t_bracket is None:
        span = c1.time - c0.time
        t_bracket = (c0.time + 0.02 * span, c1.time - 0.02 * span)
    grid = np.linspace(t_bracket[0], t_bracket[1], 9)
    cont0 = complexmech.continue_branch(b0, grid, G=G, Omega=Omega, tol=tol,
                                        caustic=c0)
    cont1 = complexmech.continue_branch(b1, grid, G=G, Omega=Omega, tol=tol,
                                        caustic=c1)
    r0 = cont0.rates()
    r1 = cont1.rates()
    d = r0 - r1
    ok = np.isfinite(d)
    idx = [i for i in range(len(grid) - 1)
           if ok[i] and ok[i + 1] and d[i] * d[i + 1] < 0]
    if not idx:
        return DPTResult(t_c=float("nan"), rate=float("nan"), found=False)
    i = idx[0]
    lo_t, hi_t = grid[i], grid[i + 1]
    lo_d = d[i]
    sol0 = cont0.solutions[i]
    sol1 = cont1.solutions[i]
    while hi_t - lo_t > xtol:
        mid = 0.5 * (lo_t + hi_t)
        s0 = complexmech.shoot_return(mid, eta0, eta0, sol0.phi0, G, Omega,
                                      tol=tol, branch=b0)
        s1 = complexmech.shoot_return(mid, eta0, eta0, sol1.phi0, G, Omega,
                                      tol=tol, branch=b1)
        if not (s0.converged and s1.converged):  # pragma: no cover
            break
        dm = 2.0 * (s0.action.imag - s1.action.imag)
        if dm == 0.0:
            lo_t = hi_t = mid
            sol0, sol1 = s0, s1
            break
        if (dm > 0) == (lo_d > 0):
            lo_t, lo_d = mid, dm
        else:
            hi_t = mid
        sol0, sol1 = s0, s1
    t_c = 0.5 * (lo_t + hi_t)
    rate = 2.0 * max(sol0.action.imag, sol1.action.imag)
    return DPTResult(t_c=float(t_c), rate=float(rate), found=True)


@dataclass(frozen=True)
class Extrapolation:
    r_inf: float
    slope: float
    residual: float
    low_confidence: bool


def finite_size_extrapolate(rates_by_j, t=None):
    """Linear fit of r(j) against 1/j; the intercept estimates r(j -> inf).

    ``rates_by_j`` maps j to a rate value (at a common fixed time).  With
    four or more sizes a quadratic 1/j term is included.  The residual is
    the rms misfit; non-monotone residual structure sets low_confidence.
    """
    if len(rates_by_j) < 3:
        raise ValueError("need at least 3 system sizes")
    js = np.array(sorted(rates_by_j), dtype=float)
    r = np.array([rates_by_j[j] for j in js])
    x = 1.0 / js
    order = 2 if len(js) >= 4 else 1
    coef = np.polyfit(x, r, order)
    fit = np.polyval(coef, x)
    resid = r - fit
    rms = float(np.sqrt(np.mean(resid ** 2)))
    diffs = np.diff(r)
    low_conf = bool(np.any(diffs[:-1] * diffs[1:] < 0))
    return Extrapolation(r_inf=float(coef[-1]), slope=float(coef[-2]),
                         residual=rms, low_confidence=low_conf)
