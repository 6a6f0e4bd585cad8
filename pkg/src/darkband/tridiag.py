"""Symmetric tridiagonal eigensolver (implicit-shift QL with eigenvectors).

The collective-spin Hamiltonian is exactly tridiagonal in the Fock basis, so
the core spectral path uses this dedicated solver instead of a dense general
routine.  The kernel is the classic implicit-shift QL iteration; it is JIT
compiled for float64 and falls back to the interpreted version for other
dtypes.  ``refine_eigenpairs`` polishes a float64 decomposition to extended
or arbitrary precision by inverse iteration, which is what the deep dark-band
Loschmidt evaluation needs (the mode sum there cancels below double precision).
"""

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        return wrap if not (args and callable(args[0])) else args[0]


class ConvergenceError(RuntimeError):
    """QL iteration failed to deflate within the sweep budget."""

    def __init__(self, size, residual, message=None):
        self.size = size
        self.residual = residual
        super().__init__(
            message
            or f"tridiagonal QL failed to converge (n={size}, residual={residual:.3e})"
        )


def _ql_kernel(d, e, V, max_sweeps):
    """Implicit-shift QL on (d, e) accumulating rotations into V.

    d: diagonal (n,), overwritten with eigenvalues (unordered).
    e: subdiagonal (n,), e[0..n-2] used, destroyed.
    V: (n, n) identity on entry, columns become eigenvectors.
    Returns 0 on success, 1 + index of the stuck row on failure.
    """
    n = d.shape[0]
    eps = 2.3e-16
    for l in range(n):
        sweeps = 0
        while True:
            m = n - 1
            for mm in range(l, n - 1):
                dd = abs(d[mm]) + abs(d[mm + 1])
                if abs(e[mm]) <= eps * dd:
                    m = mm
                    break
            if m == l:
                break
            sweeps += 1
            if sweeps > max_sweeps:
                return 1 + l
            # implicit shift from the 2x2 at the deflation corner
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = np.hypot(g, 1.0)
            sg = r if g >= 0.0 else -r
            g = d[m] - d[l] + e[l] / (g + sg)
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = np.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                for k in range(n):
                    f = V[k, i + 1]
                    V[k, i + 1] = s * V[k, i] + c * f
                    V[k, i] = c * V[k, i] - s * f
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return 0


if _HAVE_NUMBA:
    _ql_kernel_f64 = njit(cache=True)(_ql_kernel)
else:  # pragma: no cover
    _ql_kernel_f64 = _ql_kernel


def eigh_tridiagonal(diag, offdiag, max_sweeps=60):
    """Eigen-decomposition of a real symmetric tridiagonal matrix.

    Parameters
    ----------
    diag : (n,) diagonal entries
    offdiag : (n-1,) sub/super-diagonal entries
    max_sweeps : QL sweep budget per eigenvalue

    Returns
    -------
    w : (n,) eigenvalues, ascending
    V : (n, n) orthonormal eigenvectors, column i pairs with w[i]; the
        largest-magnitude component of each column is made positive.

    Raises
    ------
    ConvergenceError if deflation stalls.
    """
    d = np.asarray(diag, dtype=float).copy()
    n = d.shape[0]
    if n == 0:
        raise ValueError("empty matrix")
    e = np.zeros(n, dtype=float)
    if n > 1:
        e[: n - 1] = np.asarray(offdiag, dtype=float)
    V = np.eye(n)
    if n > 1:
        status = _ql_kernel_f64(d, e, V, max_sweeps)
        if status != 0:
            raise ConvergenceError(n, abs(e[status - 1]))
    order = np.argsort(d, kind="stable")
    w = d[order]
    V = V[:, order]
    _fix_eigenvector_signs(V)
    return w, V


def _fix_eigenvector_signs(V):
    """Deterministic convention: largest-|component| of each column positive."""
    idx = np.argmax(np.abs(V), axis=0)
    flip = V[idx, np.arange(V.shape[1])] < 0
    V[:, flip] *= -1.0


def _solve_shifted(diag, off, shift, rhs):
    """Solve (T - shift*I) x = rhs for tridiagonal T, partial pivoting.

    Generic over the scalar type of ``shift``/``rhs`` entries (float,
    np.longdouble, mpmath.mpf), so it doubles as the precision-refinement
    workhorse.  O(n) time, O(n) extra storage for the fill-in band.
    """
    n = len(diag)
    a = [diag[i] - shift for i in range(n)]  # main
    b = [off[i] for i in range(n - 1)]  # super
    c = [off[i] for i in range(n - 1)]  # sub
    f = [rhs[i] for i in range(n)]
    sup2 = [0 * shift for _ in range(n)]  # second superdiagonal fill-in
    for i in range(n - 1):
        if abs(c[i]) > abs(a[i]):
            # swap rows i, i+1
            a[i], c[i] = c[i], a[i]
            bi = b[i]
            b[i] = a[i + 1]
            a[i + 1] = bi
            if i + 1 < n - 1:
                sup2[i] = b[i + 1]
                b[i + 1] = 0 * shift
            f[i], f[i + 1] = f[i + 1], f[i]
        if a[i] == 0:
            a[i] = a[i] + 1e-300
        m = c[i] / a[i]
        a[i + 1] = a[i + 1] - m * b[i]
        if i + 1 < n - 1:
            b[i + 1] = b[i + 1] - m * sup2[i]
        f[i + 1] = f[i + 1] - m * f[i]
    x = [0 * shift for _ in range(n)]
    if a[n - 1] == 0:
        a[n - 1] = a[n - 1] + 1e-300
    x[n - 1] = f[n - 1] / a[n - 1]
    if n > 1:
        x[n - 2] = (f[n - 2] - b[n - 2] * x[n - 1]) / a[n - 2]
    for i in range(n - 3, -1, -1):
        x[i] = (f[i] - b[i] * x[i + 1] - sup2[i] * x[i + 2]) / a[i]
    return x


def refine_eigenpairs(diag, offdiag, w, V, arith, iterations=2, select=None):
    """Polish (w, V) by inverse iteration in a higher-precision arithmetic.

    Parameters
    ----------
    diag, offdiag : matrix data (converted entrywise via ``arith``)
    w, V : float64 eigendecomposition used as the starting guess
    arith : callable mapping a float to the target scalar type
        (e.g. ``np.longdouble`` or ``mpmath.mpf``)
    iterations : inverse-iteration steps per eigenpair
    select : optional index iterable; only these eigenpairs are refined

    Returns
    -------
    (w_ref, V_ref) as lists (length n; unrefined entries are converted copies).
    Assumes well-separated eigenvalues, which holds for the spin Hamiltonians
    used here; each pair is refined independently.
    """
    n = len(w)
    d = [arith(x) for x in np.asarray(diag, dtype=float)]
    e = [arith(x) for x in np.asarray(offdiag, dtype=float)]
    idx = range(n) if select is None else select
    w_ref = [arith(x) for x in w]
    V_ref = [[arith(V[i, k]) for i in range(n)] for k in range(n)]
    for k in idx:
        lam = w_ref[k]
        x = V_ref[k]
        for _ in range(iterations):
            y = _solve_shifted(d, e, lam, x)
            nrm = _norm(y)
            x = [yi / nrm for yi in y]
            # Rayleigh quotient of the tridiagonal form
            lam = _rayleigh(d, e, x)
        w_ref[k] = lam
        V_ref[k] = x
    return w_ref, V_ref


def _norm(x):
    s = 0 * x[0]
    for xi in x:
        s = s + xi * xi
    return s ** 0.5


def _rayleigh(d, e, x):
    n = len(x)
    s = d[0] * x[0] * x[0]
    for i in range(1, n):
        s = s + d[i] * x[i] * x[i] + 2 * e[i - 1] * x[i] * x[i - 1]
    return s
