import numpy as np
import pytest

from darkband import dicke

G = 1.0
OMEGA = 1.0


def test_space_validation():
    dicke.DickeSpace(0.5)
    dicke.DickeSpace(3.0)
    with pytest.raises(ValueError):
        dicke.DickeSpace(0.7)
    with pytest.raises(ValueError):
        dicke.DickeSpace(-1.0)


def test_nearest_m0_rule():
    assert dicke.nearest_m0(dicke.DickeSpace(80.0)) == 48.0
    assert dicke.nearest_m0(dicke.DickeSpace(10.0)) == 6.0
    assert dicke.nearest_m0(dicke.DickeSpace(350.0)) == 210.0
    # half-integer lattice: 0.6 j = 6.3 for j = 10.5 -> m in {..., 5.5, 6.5, ...}
    assert dicke.nearest_m0(dicke.DickeSpace(10.5)) == 6.5
    # tie rounds toward +inf: j = 5/2 gives 0.6 j = 1.5, lattice {.., 0.5, 1.5, ..}
    assert dicke.nearest_m0(dicke.DickeSpace(2.5)) == 1.5
    # exact tie between lattice points: j = 5, target 3.0 is on the lattice
    assert dicke.nearest_m0(dicke.DickeSpace(5.0)) == 3.0


def test_hamiltonian_jz2_spectrum_at_zero_field():
    # j = 1, Omega = 0: eigenvalues of (G/2j) Jz^2 are {0, G/2, G/2}
    H = dicke.build_hamiltonian(dicke.DickeSpace(1.0), 2.7, 0.0)
    es = dicke.diagonalize(H)
    assert np.allclose(sorted(es.energies), [0.0, 1.35, 1.35], atol=1e-14)


def test_hamiltonian_spin_half_closed_form():
    H = dicke.build_hamiltonian(dicke.DickeSpace(0.5), 1.0, 1.0)
    assert np.allclose(H.diag, [0.25, 0.25])
    assert np.allclose(H.offdiag, [0.5])
    es = dicke.diagonalize(H)
    assert np.allclose(es.energies, [-0.25, 0.75], atol=1e-15)


def test_diagonalize_roundtrip_j40():
    space = dicke.DickeSpace(40.0)
    H = dicke.build_hamiltonian(space, G, OMEGA)
    es = dicke.diagonalize(H)
    back = es.vectors @ np.diag(es.energies) @ es.vectors.T
    assert np.max(np.abs(back - H.to_dense())) < 1e-10


def test_evolve_identity_and_stationary_fock():
    space = dicke.DickeSpace(4.0)
    psi0 = dicke.SpinState.fock(space, 2.0)
    es = dicke.diagonalize(dicke.build_hamiltonian(space, G, 0.0))
    for t in (0.0, 0.7, 3.1):
        psi = dicke.evolve(es, psi0, t)
        # Fock states are stationary at Omega = 0, up to a global phase
        assert abs(abs(psi.overlap(psi0)) - 1.0) < 1e-12
    es2 = dicke.diagonalize(dicke.build_hamiltonian(space, G, OMEGA))
    psi = dicke.evolve(es2, psi0, 0.0)
    assert np.allclose(psi.amp, psi0.amp)


def test_evolve_dimension_mismatch():
    es = dicke.diagonalize(dicke.build_hamiltonian(dicke.DickeSpace(2.0), G, OMEGA))
    psi0 = dicke.SpinState.fock(dicke.DickeSpace(3.0), 1.0)
    with pytest.raises(dicke.DimensionError):
        dicke.evolve(es, psi0, 1.0)


def test_spin_half_rabi_echo():
    # j = 1/2, m0 = +1/2, Omega = G: L(t) = cos^2(Omega t / 2)
    space = dicke.DickeSpace(0.5)
    ts = np.linspace(0.0, 6.0, 31)[1:]
    cfg = dicke.QuenchConfig(G, OMEGA, space, 0.5, ts)
    for t, L in dicke.loschmidt(cfg):
        assert abs(L - np.cos(0.5 * t) ** 2) < 1e-12


def test_loschmidt_brute_force_oracle_j10():
    # independent route: dense numpy eigh + 21-term mode sum
    space = dicke.DickeSpace(10.0)
    ts = np.linspace(0.0, 6.0, 61)
    cfg = dicke.QuenchConfig(G, OMEGA, space, 6.0, ts)
    L = dicke.loschmidt(cfg)
    Hd = dicke.build_hamiltonian(space, G, OMEGA).to_dense()
    w, V = np.linalg.eigh(Hd)
    c2 = V[space.index_of(6.0), :] ** 2
    for (t, Lv) in L:
        ref = abs(np.sum(c2 * np.exp(-1j * w * t))) ** 2
        assert abs(Lv - ref) < 1e-12


def test_loschmidt_matches_evolve_overlap():
    # time-reversal form |sum |c|^2 e^{-iEt}|^2 against direct evolution
    space = dicke.DickeSpace(15.0)
    ts = np.array([0.5, 1.5, 3.0])
    m0 = dicke.nearest_m0(space)
    cfg = dicke.QuenchConfig(G, OMEGA, space, m0, ts)
    es = dicke.diagonalize(dicke.build_hamiltonian(space, G, OMEGA))
    psi0 = dicke.SpinState.fock(space, m0)
    for (t, Lv) in dicke.loschmidt(cfg):
        psi = dicke.evolve(es, psi0, t / OMEGA)
        assert abs(Lv - abs(psi.overlap(psi0)) ** 2) < 1e-12


def test_loschmidt_starts_at_one():
    space = dicke.DickeSpace(12.0)
    cfg = dicke.QuenchConfig(G, OMEGA, space, 7.0, np.array([0.0, 1.0]))
    L = dicke.loschmidt(cfg)
    assert abs(L[0][1] - 1.0) < 1e-12
    assert all(0.0 <= Lv <= 1.0 + 1e-12 for _, Lv in L)


def test_rate_function_norms_and_sentinel():
    space = dicke.DickeSpace(10.0)
    seq = [(0.0, 1.0), (1.0, np.exp(-10.0)), (2.0, 0.0)]
    r = dicke.rate_function(seq, space, "per-j")
    assert r[0][1] == 0.0
    assert abs(r[1][1] - 1.0) < 1e-12
    assert np.isnan(r[2][1])
    rN = dicke.rate_function(seq, space, "per-N")
    assert abs(rN[1][1] - 0.5) < 1e-12
    with pytest.raises(ValueError):
        dicke.rate_function(seq, space, "per-volume")


def test_fock_map_consistency(eigensystems):
    space, es = eigensystems(20.0)
    ts = np.linspace(0.0, 5.0, 26)
    cfg = dicke.QuenchConfig(G, OMEGA, space, 12.0, ts)
    amps = dicke.fock_map(cfg)
    # columns are unit-normalized
    assert np.max(np.abs(np.sum(amps ** 2, axis=0) - 1.0)) < 1e-10
    # t = 0 column is the initial Fock state
    col0 = np.zeros(space.dim)
    col0[space.index_of(12.0)] = 1.0
    assert np.allclose(amps[:, 0], col0, atol=1e-12)
    # the m0 row squared equals the echo pointwise
    L = np.array([x[1] for x in dicke.loschmidt(cfg)])
    assert np.max(np.abs(amps[space.index_of(12.0), :] ** 2 - L)) < 1e-12


def test_unitarity_and_energy_conservation(eigensystems):
    space, es = eigensystems(40.0)
    H = dicke.build_hamiltonian(space, G, OMEGA)
    psi0 = dicke.SpinState.fock(space, 24.0)
    e_ref = None
    for t in np.linspace(0.0, 10.0, 11):
        psi = dicke.evolve(es, psi0, t)
        assert abs(np.sum(np.abs(psi.amp) ** 2) - 1.0) < 1e-10
        e = np.real(np.vdot(psi.amp, H.matvec(psi.amp)))
        e_ref = e if e_ref is None else e_ref
        assert abs(e - e_ref) < 1e-10 * max(1.0, abs(e_ref))


def test_eigensystem_invariants_j80(eigensystems):
    space, es = eigensystems(80.0)
    assert np.all(np.diff(es.energies) >= 0)
    gram = es.vectors.T @ es.vectors
    assert np.max(np.abs(gram - np.eye(space.dim))) < 1e-10
    H = dicke.build_hamiltonian(space, G, OMEGA)
    for n in (0, 50, 160):
        v = es.vectors[:, n]
        res = H.matvec(v) - es.energies[n] * v
        assert np.max(np.abs(res)) < 1e-9 * H.norm_inf()


def test_echo_morphology_j80(eigensystems):
    # slice through the two fold caustics: oscillatory bright region, a deep
    # quiet plateau between the folds, then a revival burst; the stretch
    # after the revival stays suppressed relative to it
    space, _ = eigensystems(80.0)
    ts = np.linspace(0.05, 6.0, 240)
    cfg = dicke.QuenchConfig(G, OMEGA, space, 48.0, ts)
    L = np.array([x[1] for x in dicke.loschmidt(cfg)])
    t = ts
    plateau = L[(t > 2.6) & (t < 3.6)].max()
    revival = L[(t > 3.9) & (t < 5.0)].max()
    early = L[t < 1.9].max()
    post = L[(t > 5.0) & (t < 6.0)].max()
    assert plateau < 1e-3
    assert revival > 10 * plateau
    assert early > 10 * plateau
    assert post < revival


def test_high_precision_path_matches_double_when_benign():
    space = dicke.DickeSpace(12.0)
    ts = np.array([0.4, 1.1, 2.9])
    cfg = dicke.QuenchConfig(G, OMEGA, space, 7.0, ts)
    L64 = dicke.loschmidt(cfg)
    Lhp = dicke.loschmidt_hp(cfg, dps=30)
    for (t, a), (_, b) in zip(L64, Lhp):
        assert abs(a - b) < 1e-11
