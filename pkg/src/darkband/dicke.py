"""Exact quantum dynamics of the fully connected transverse-field Ising model.

Everything lives in the maximal-spin (Dicke) sector: the Hamiltonian

    H = (G/2j) Jz^2 + Omega Jx

is real symmetric tridiagonal in the Jz (Fock) basis |j, m>, m = -j..j.
Spectral decomposition uses the dedicated QL solver in :mod:`darkband.tridiag`;
time evolution is spectral synthesis (no ODE stepping), so long time grids
carry no accumulated error.

Times handed to the grid-level routines (``loschmidt``, ``fock_map``) are the
dimensionless combinations Omega*t from :class:`QuenchConfig`; the low-level
``evolve`` takes physical time.
"""

from dataclasses import dataclass

import numpy as np

from . import tridiag

#: L(t) below this is recorded as an underflow sentinel, never silently as 0.
UNDERFLOW_FLOOR = 1e-300

#: Sentinel for rate values whose echo underflowed.
UNDERFLOW = float("nan")


class DimensionError(ValueError):
    """State/operator dimension mismatch."""


@dataclass(frozen=True)
class DickeSpace:
    """Symmetric sector of N = 2j spins; dimension 2j + 1."""

    j: float

    def __post_init__(self):
        twoj = 2 * self.j
        if twoj < 0 or abs(twoj - round(twoj)) > 1e-12:
            raise ValueError(f"2j must be a non-negative integer, got j={self.j}")

    @property
    def dim(self):
        return int(round(2 * self.j)) + 1

    @property
    def n_spins(self):
        return int(round(2 * self.j))

    def m_values(self):
        """Fock labels m = -j, -j+1, ..., j (floats; half-integers allowed)."""
        return -self.j + np.arange(self.dim)

    def index_of(self, m):
        i = int(round(m + self.j))
        if not 0 <= i < self.dim or abs((m + self.j) - i) > 1e-9:
            raise ValueError(f"m={m} is not a Fock label of j={self.j}")
        return i


@dataclass(frozen=True)
class SpinState:
    """Normalized amplitude vector over the Fock basis of ``space``."""

    space: DickeSpace
    amp: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amp, dtype=complex)
        if amp.shape != (self.space.dim,):
            raise DimensionError(
                f"amplitude length {amp.shape} does not match dim {self.space.dim}"
            )
        norm = np.sum(np.abs(amp) ** 2)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state norm^2 = {norm!r} deviates from 1 beyond 1e-12")
        object.__setattr__(self, "amp", amp)

    @classmethod
    def fock(cls, space, m0):
        amp = np.zeros(space.dim, dtype=complex)
        amp[space.index_of(m0)] = 1.0
        return cls(space, amp)

    def overlap(self, other):
        return np.vdot(self.amp, other.amp)


def nearest_m0(space, fraction=0.6):
    """Fock label closest to ``fraction * j`` (ties round toward +inf)."""
    target = fraction * space.j
    lo = np.floor(target - (-space.j)) + (-space.j)  # lattice point <= target
    hi = lo + 1.0
    if hi > space.j:
        m0 = lo
    elif target - lo < hi - target:
        m0 = lo
    else:
        m0 = hi  # includes the tie
    return float(min(max(m0, -space.j), space.j))


@dataclass(frozen=True)
class QuenchConfig:
    """One quench experiment: couplings, initial Fock state, time grid."""

    G: float
    Omega: float
    space: DickeSpace
    m0: float
    times: np.ndarray
    norm: str = "per-j"

    def __post_init__(self):
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        self.space.index_of(self.m0)  # validates |m0| <= j and lattice membership
        if self.times.ndim != 1 or len(self.times) == 0:
            raise ValueError("times must be a non-empty 1d sequence")
        if self.times[0] < 0:
            raise ValueError("times must start at >= 0")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if self.norm not in ("per-j", "per-N"):
            raise ValueError(f"unknown norm {self.norm!r}")


@dataclass(frozen=True)
class Tridiagonal:
    """Real symmetric tridiagonal operator (diagonal + one off-diagonal)."""

    diag: np.ndarray
    offdiag: np.ndarray

    @property
    def dim(self):
        return len(self.diag)

    def to_dense(self):
        H = np.diag(self.diag)
        idx = np.arange(self.dim - 1)
        H[idx, idx + 1] = self.offdiag
        H[idx + 1, idx] = self.offdiag
        return H

    def matvec(self, v):
        out = self.diag * v
        out[:-1] += self.offdiag * v[1:]
        out[1:] += self.offdiag * v[:-1]
        return out

    def norm_inf(self):
        a = np.abs(self.diag).copy()
        a[:-1] += np.abs(self.offdiag)
        a[1:] += np.abs(self.offdiag)
        return float(a.max()) if len(a) else 0.0


@dataclass(frozen=True)
class EigenSystem:
    """Ascending energies and orthonormal eigenvectors of the Hamiltonian."""

    energies: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self):
        return len(self.energies)

    def coefficients(self, state):
        """Expansion coefficients c_n = <E_n|psi> of a state."""
        return self.vectors.T @ state.amp


def build_hamiltonian(space, G, Omega):
    """Tridiagonal H = (G/2j) Jz^2 + Omega Jx in the Fock basis.

    Diagonal entry at m is (G/2j) m^2; the coupling between m and m+1 is
    (Omega/2) sqrt(j(j+1) - m(m+1)).  For j = 0 the off-diagonal is empty.
    """
    j = space.j
    m = space.m_values()
    if j > 0:
        diag = (G / (2.0 * j)) * m ** 2
    else:
        diag = np.zeros(1)
    mm = m[:-1]
    offdiag = 0.5 * Omega * np.sqrt(j * (j + 1.0) - mm * (mm + 1.0))
    return Tridiagonal(diag=diag, offdiag=offdiag)


def diagonalize(H):
    """EigenSystem of a :class:`Tridiagonal` via implicit-shift QL.

    Deterministic sign convention: the largest-magnitude component of each
    eigenvector is positive.  Raises :class:`darkband.tridiag.ConvergenceError`
    (carrying size and residual) if the iteration stalls.
    """
    w, V = tridiag.eigh_tridiagonal(H.diag, H.offdiag)
    return EigenSystem(energies=w, vectors=V)


def evolve(es, psi0, t):
    """|psi(t)> = sum_n c_n e^{-i E_n t} |E_n> (physical time t)."""
    if es.dim != psi0.space.dim:
        raise DimensionError(
            f"eigensystem dim {es.dim} != state dim {psi0.space.dim}"
        )
    c = es.coefficients(psi0)
    amp = es.vectors @ (np.exp(-1j * es.energies * t) * c)
    return SpinState(psi0.space, amp)


def _mode_weights(cfg):
    """(E_n, |c_n|^2) for the configured initial Fock state."""
    es = diagonalize(build_hamiltonian(cfg.space, cfg.G, cfg.Omega))
    i0 = cfg.space.index_of(cfg.m0)
    c = es.vectors[i0, :]
    return es, c ** 2


def loschmidt(cfg):
    """Return probability L(t) = |<psi0|psi(t)>|^2 on the configured grid.

    The grid holds Omega*t values; the positive-definite Fourier form
    L = |sum_n |c_n|^2 e^{-i E_n t}|^2 is evaluated directly.  Returns a list
    of (Omega*t, L) pairs.  L(0) = 1 by normalization of the weights.
    """
    es, w2 = _mode_weights(cfg)
    t_phys = cfg.times / cfg.Omega
    amp = np.exp(-1j * np.outer(t_phys, es.energies)) @ w2
    return list(zip(cfg.times.tolist(), (np.abs(amp) ** 2).tolist()))


def loschmidt_hp(cfg, dps=40, weight_floor=1e-60):
    """High-precision Loschmidt echo for deep dark-band rates.

    At j ~ 350 the mode sum cancels to ~1e-23 of its largest term, below
    float64 resolution.  This path refines the contributing eigenpairs by
    inverse iteration at ``dps`` decimal digits and evaluates the sum in
    mpmath.  Modes with double-precision weight below ``weight_floor`` are
    kept at double precision (their contribution is bounded by the floor).
    """
    import mpmath as mp

    H = build_hamiltonian(cfg.space, cfg.G, cfg.Omega)
    w, V = tridiag.eigh_tridiagonal(H.diag, H.offdiag)
    i0 = cfg.space.index_of(cfg.m0)
    w2_double = V[i0, :] ** 2
    select = [int(k) for k in np.nonzero(w2_double > weight_floor)[0]]
    with mp.workdps(dps):
        w_ref, V_ref = tridiag.refine_eigenpairs(
            H.diag, H.offdiag, w, V, mp.mpf, iterations=2, select=select
        )
        weights = {k: V_ref[k][i0] ** 2 for k in select}
        out = []
        for tau in cfg.times:
            t_phys = mp.mpf(float(tau)) / mp.mpf(cfg.Omega)
            acc = mp.mpc(0)
            for k in select:
                acc += weights[k] * mp.expj(-w_ref[k] * t_phys)
            out.append((float(tau), float(mp.fabs(acc) ** 2)))
    return out


def rate_function(L_seq, space, norm="per-j"):
    """Rate r(t) = -ln L / j (per-j) or -ln L / 2j (per-N).

    Input is the (t, L) sequence from :func:`loschmidt`.  Entries with L at or
    below the underflow floor are emitted with the NaN sentinel so downstream
    kink detection can skip them.
    """
    div = space.j if norm == "per-j" else 2.0 * space.j
    if norm not in ("per-j", "per-N"):
        raise ValueError(f"unknown norm {norm!r}")
    out = []
    for t, L in L_seq:
        if L <= UNDERFLOW_FLOOR:
            out.append((t, UNDERFLOW))
        else:
            out.append((t, -np.log(L) / div))
    return out


def fock_map(cfg):
    """|<j,m|psi(t)>| on the (m, t) grid; one column per grid time.

    Column normalization (unit sum of squares) is inherited from unitarity.
    """
    es, _ = _mode_weights(cfg)
    i0 = cfg.space.index_of(cfg.m0)
    c = es.vectors[i0, :]
    t_phys = cfg.times / cfg.Omega
    phases = np.exp(-1j * np.outer(es.energies, t_phys))  # (n, T)
    amps = es.vectors @ (phases * c[:, None])  # (m, T)
    return np.abs(amps)
