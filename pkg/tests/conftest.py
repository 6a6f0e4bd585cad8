"""Shared fixtures: the expensive spectral and saddle data, computed once."""

import numpy as np
import pytest

from darkband import complexmech, dicke, wkb

G = 1.0
OMEGA = 1.0
ETA0 = 0.6

#: standard dark-band analysis grid
DARK_GRID = np.linspace(2.0, 4.4, 121)


@pytest.fixture(scope="session")
def eigensystems():
    cache = {}

    def get(j):
        if j not in cache:
            space = dicke.DickeSpace(j)
            cache[j] = (space, dicke.diagonalize(
                dicke.build_hamiltonian(space, G, OMEGA)))
        return cache[j]

    return get


@pytest.fixture(scope="session")
def caustics():
    b0 = wkb.ActionBranch.k0(ETA0)
    b1 = wkb.ActionBranch.k1(ETA0)
    return (wkb.caustic_times(b0, G, OMEGA), wkb.caustic_times(b1, G, OMEGA))


@pytest.fixture(scope="session")
def continuations(caustics):
    c0, c1 = caustics
    b0 = wkb.ActionBranch.k0(ETA0)
    b1 = wkb.ActionBranch.k1(ETA0)
    k0 = complexmech.continue_branch(b0, DARK_GRID, G=G, Omega=OMEGA, caustic=c0)
    k1 = complexmech.continue_branch(b1, DARK_GRID, G=G, Omega=OMEGA, caustic=c1)
    return k0, k1


@pytest.fixture(scope="session")
def rate_curve(continuations):
    return complexmech.asymptotic_rate(DARK_GRID, ETA0, G, OMEGA,
                                       continuations=continuations)


@pytest.fixture(scope="session")
def exact_rates(eigensystems):
    """Per-j exact rate arrays on DARK_GRID (per-j normalization)."""

    def rates(j):
        space, es = eigensystems(j)
        m0 = dicke.nearest_m0(space)
        cfg = dicke.QuenchConfig(G, OMEGA, space, m0, DARK_GRID)
        i0 = space.index_of(m0)
        w2 = es.vectors[i0, :] ** 2
        amp = np.exp(-1j * np.outer(DARK_GRID / OMEGA, es.energies)) @ w2
        L = np.abs(amp) ** 2
        return -np.log(L) / space.j

    return rates
