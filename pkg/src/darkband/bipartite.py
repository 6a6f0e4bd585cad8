"""Two coupled collective spins and the conditioned-measurement protocol.

The system splits into subsystems I and S of N atoms each (j_sub = N/2),
with the same all-to-all Hamiltonian acting on the total spin:

    H = (G/2N)(Iz + Sz)^2 + Omega (Ix + Sx).

Starting from the product Fock state |N/2, m0> x |N/2, m0>, the reduced state
of subsystem I defines a mixed-state return probability; conditioning on the
sign of an Sy measurement of subsystem S splits that echo into the two
contributions whose crossing marks the transition.

Basis order: product index i = a * (N+1) + b with a, b the Fock offsets of
m_I and m_S (m_I slow, m_S fast).
"""

from dataclasses import dataclass

import numpy as np

from . import tridiag
from .dicke import DickeSpace, SpinState, UNDERFLOW, UNDERFLOW_FLOOR

#: full diagonalization is refused above this total dimension
DENSE_BUDGET = 2500


class ResourceError(RuntimeError):
    """Requested propagation exceeds the dense-diagonalization budget."""


@dataclass(frozen=True)
class BipartiteSpace:
    """Two subsystems of n_per_side atoms each (even), j_sub = N/2."""

    n_per_side: int

    def __post_init__(self):
        if self.n_per_side <= 0 or self.n_per_side % 2:
            raise ValueError("n_per_side must be a positive even integer")

    @property
    def j_sub(self):
        return self.n_per_side / 2.0

    @property
    def side_dim(self):
        return self.n_per_side + 1

    @property
    def dim(self):
        return self.side_dim ** 2

    def sub_space(self):
        return DickeSpace(self.j_sub)


@dataclass(frozen=True)
class BipartiteState:
    """Normalized amplitude grid over (m_I, m_S)."""

    space: BipartiteSpace
    amp: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amp, dtype=complex)
        d = self.space.side_dim
        if amp.shape != (d, d):
            raise ValueError(f"amplitude grid must be {(d, d)}, got {amp.shape}")
        norm = np.sum(np.abs(amp) ** 2)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state norm^2 = {norm!r} deviates from 1 beyond 1e-12")
        object.__setattr__(self, "amp", amp)

    @classmethod
    def product_fock(cls, space, m0):
        sub = space.sub_space()
        i0 = sub.index_of(m0)
        amp = np.zeros((space.side_dim, space.side_dim), dtype=complex)
        amp[i0, i0] = 1.0
        return cls(space, amp)


@dataclass(frozen=True)
class ReducedState:
    """Hermitian PSD trace-one density matrix of subsystem I."""

    rho: np.ndarray


def _jx_offdiag(j):
    m = -j + np.arange(int(round(2 * j)))
    return 0.5 * np.sqrt(j * (j + 1.0) - m * (m + 1.0))


def build_bipartite_hamiltonian(space, G, Omega):
    """Dense real symmetric H = (G/2N)(Iz+Sz)^2 + Omega (Ix+Sx)."""
    N = space.n_per_side
    j = space.j_sub
    d = space.side_dim
    m = -j + np.arange(d)
    msum = m[:, None] + m[None, :]
    H = np.zeros((space.dim, space.dim))
    H[np.arange(space.dim), np.arange(space.dim)] = (
        (G / (2.0 * N)) * msum ** 2
    ).ravel()
    hop = Omega * _jx_offdiag(j)
    eye = np.eye(d)
    # Ix couples neighboring m_I at fixed m_S, Sx the reverse
    for a in range(d - 1):
        blk = slice(a * d, (a + 1) * d)
        nxt = slice((a + 1) * d, (a + 2) * d)
        H[blk, nxt] += hop[a] * eye
        H[nxt, blk] += hop[a] * eye
    sx = np.zeros((d, d))
    idx = np.arange(d - 1)
    sx[idx, idx + 1] = hop
    sx[idx + 1, idx] = hop
    for a in range(d):
        blk = slice(a * d, (a + 1) * d)
        H[blk, blk] += sx
    return H


class BipartitePropagator:
    """Spectral propagator; immutable and shareable across time points."""

    def __init__(self, space, G, Omega):
        if space.dim > DENSE_BUDGET:
            raise ResourceError(
                f"dim {space.dim} exceeds the dense budget {DENSE_BUDGET}"
            )
        self.space = space
        self.H = build_bipartite_hamiltonian(space, G, Omega)
        self.energies, self.vectors = np.linalg.eigh(self.H)

    def evolve(self, psi0, t):
        c = self.vectors.T @ psi0.amp.ravel()
        amp = self.vectors @ (np.exp(-1j * self.energies * t) * c)
        return BipartiteState(self.space, amp.reshape(psi0.amp.shape))


def evolve_bipartite(space, psi0, t, G, Omega, propagator=None):
    """|Psi(t)> by full diagonalization (dim <= DENSE_BUDGET, else error)."""
    prop = propagator if propagator is not None else BipartitePropagator(space, G, Omega)
    return prop.evolve(psi0, t)


def reduced_density(psi):
    """rho_I = tr_S |Psi><Psi|."""
    A = psi.amp
    return ReducedState(rho=A @ A.conj().T)


def mixed_loschmidt(rho, psi0_single, space):
    """(L, r): reduced-state echo <psi0|rho_I|psi0> and its per-N rate."""
    v = psi0_single.amp
    L = float(np.real(v.conj() @ rho.rho @ v))
    if L <= UNDERFLOW_FLOOR:
        return L, UNDERFLOW
    return L, -np.log(L) / space.n_per_side


def _sy_eigenbasis(j):
    """Eigenvalues and vectors of S_y via the real tridiagonal similarity.

    S_y is Hermitian tridiagonal with imaginary off-diagonals; conjugating by
    diag(i^k) gives a real symmetric tridiagonal handled by the dedicated QL
    solver (one code path for all spectral work).
    """
    d = int(round(2 * j)) + 1
    c = 2.0 * _jx_offdiag(j)  # <m+1|J+|m>
    w, V = tridiag.eigh_tridiagonal(np.zeros(d), -0.5 * c)
    phases = 1j ** np.arange(d)
    return w, phases[:, None] * V.astype(complex)


def sy_povm(space):
    """(E_plus, E_minus): projectors onto S_y >= 0 and < 0 on subsystem S.

    m = 0 belongs to E_plus; E_minus is constructed as identity minus E_plus,
    so completeness is exact.  Returned as dense matrices on the full space.
    """
    j = space.j_sub
    w, V = _sy_eigenbasis(j)
    keep = w > -1e-9  # m >= 0 (half-integer spectra have no zero for N even)
    P = V[:, keep] @ V[:, keep].conj().T
    eye_I = np.eye(space.side_dim)
    E_plus = np.kron(eye_I, P)
    E_minus = np.eye(space.dim) - E_plus
    return E_plus, E_minus


def conditioned_loschmidt(psi, psi0_single, space):
    """POVM-resolved echo: (L_plus, L_minus, p_plus, p_minus, r_plus, r_minus).

    L_pm = <psi0| tr_S(E_pm |Psi><Psi|) |psi0> computed in the S_y eigenbasis
    of subsystem S; p_pm are the outcome probabilities.  L_plus + L_minus
    equals the unconditioned echo as an operator identity.
    """
    j = space.j_sub
    w, V = _sy_eigenbasis(j)
    B = psi.amp @ V.conj()  # (m_I, sy-index)
    v = psi0_single.amp
    row = v.conj() @ B  # <psi0, y_s|Psi>
    keep = w > -1e-9
    weights = np.abs(row) ** 2
    L_plus = float(np.sum(weights[keep]))
    L_minus = float(np.sum(weights[~keep]))
    probs = np.sum(np.abs(B) ** 2, axis=0)
    p_plus = float(np.sum(probs[keep]))
    p_minus = float(np.sum(probs[~keep]))
    N = space.n_per_side

    def rate(L):
        return UNDERFLOW if L <= UNDERFLOW_FLOOR else -np.log(L) / N

    return L_plus, L_minus, p_plus, p_minus, rate(L_plus), rate(L_minus)


def conditioned_rates(space, m0, times, G, Omega):
    """Full protocol sweep: per-time unconditioned and conditioned echoes.

    Returns a list of rows (t, L, r, L_plus, L_minus, r_plus, r_minus,
    p_plus); times are Omega*t values as in the single-spin module.
    """
    prop = BipartitePropagator(space, G, Omega)
    psi0 = BipartiteState.product_fock(space, m0)
    psi0_single = SpinState.fock(space.sub_space(), m0)
    rows = []
    for tau in np.asarray(times, dtype=float):
        psi = prop.evolve(psi0, tau / Omega)
        rho = reduced_density(psi)
        L, r = mixed_loschmidt(rho, psi0_single, space)
        Lp, Lm, pp, pm, rp, rm = conditioned_loschmidt(psi, psi0_single, space)
        rows.append((float(tau), L, r, Lp, Lm, rp, rm, pp))
    return rows
