"""Three-cavity state space: basis bookkeeping, operators, partial
transpose and the negativity measure.

Each cavity is truncated to its lowest two Fock states, so the joint space
is 8-dimensional.  The basis ordering is fixed once and for all:

    index 0 |000>    index 4 |110>
    index 1 |100>    index 5 |101>
    index 2 |010>    index 6 |011>
    index 3 |001>    index 7 |111>

where |n1 n2 n3> lists the photon number of cavities 1..3.  Indices in code
are 0-based; log messages and CSV headers use the conventional 1-based
rho_jk names (so rho11 is the vacuum population).
"""

import numpy as np

OCCUPATIONS = (
    (0, 0, 0),
    (1, 0, 0),
    (0, 1, 0),
    (0, 0, 1),
    (1, 1, 0),
    (1, 0, 1),
    (0, 1, 1),
    (1, 1, 1),
)

DIM = len(OCCUPATIONS)

_INDEX = {occ: i for i, occ in enumerate(OCCUPATIONS)}


def basis_index(occupations):
    """0-based basis index of the state with occupations (n1, n2, n3)."""
    return _INDEX[tuple(occupations)]


def occupation_number(index, cavity):
    """Photon number of ``cavity`` (1, 2 or 3) in basis state ``index``."""
    return OCCUPATIONS[index][cavity - 1]


def toggled_index(index, cavity):
    """Basis index reached by flipping the photon number of ``cavity``.

    The truncation makes raising and lowering the same index operation;
    callers gate on occupation_number to pick the physical one.
    """
    occ = list(OCCUPATIONS[index])
    occ[cavity - 1] ^= 1
    return _INDEX[tuple(occ)]


def annihilation(cavity):
    """Annihilation operator of ``cavity`` as an 8x8 matrix.

    <m|a_i|n> = 1 exactly when m equals n with cavity i lowered 1 -> 0.
    """
    if cavity not in (1, 2, 3):
        raise ValueError(f"cavity index must be 1, 2 or 3, got {cavity!r}")
    a = np.zeros((DIM, DIM), dtype=complex)
    for n in range(DIM):
        if occupation_number(n, cavity) == 1:
            a[toggled_index(n, cavity), n] = 1.0
    return a


def state_vector(kind):
    """Normalized ket for one of the named initial states, 'W' or 'GHZ'."""
    psi = np.zeros(DIM, dtype=complex)
    name = str(kind).upper()
    if name == "W":
        psi[[1, 2, 3]] = 1.0 / np.sqrt(3.0)
    elif name == "GHZ":
        psi[[0, 7]] = 1.0 / np.sqrt(2.0)
    else:
        raise ValueError(f"unknown initial state {kind!r}, expected 'W' or 'GHZ'")
    return psi


def initial_state(kind):
    """Density matrix |psi><psi| of the named pure state."""
    psi = state_vector(kind)
    return np.outer(psi, psi.conj())


def _partial_transpose_maps():
    # rho^PT[j, k] = rho[j', k'] where j' carries k's first-cavity occupation
    # and k' carries j's.  Precomputed once as fancy-index tables.
    rows = np.empty((DIM, DIM), dtype=np.intp)
    cols = np.empty((DIM, DIM), dtype=np.intp)
    for j in range(DIM):
        for k in range(DIM):
            nj, nk = OCCUPATIONS[j], OCCUPATIONS[k]
            rows[j, k] = _INDEX[(nk[0], nj[1], nj[2])]
            cols[j, k] = _INDEX[(nj[0], nk[1], nk[2])]
    return rows, cols


_PT_ROWS, _PT_COLS = _partial_transpose_maps()


def partial_transpose_first(rho):
    """Partial transpose of ``rho`` with respect to cavity 1.

    <n1 n2 n3| rho^PT |m1 m2 m3> = <m1 n2 n3| rho |n1 m2 m3>.  Involutive,
    preserves Hermiticity and trace, but not positivity (that is the point).
    """
    rho = np.asarray(rho)
    return rho[_PT_ROWS, _PT_COLS]


def hermitian_eigenvalues(matrix, tol=1e-12, max_sweeps=60):
    """Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations.

    Complex off-diagonal entries are annihilated with phased plane
    rotations.  Sweeps repeat until the off-diagonal Frobenius norm drops
    below ``tol``.  Returns the eigenvalues sorted ascending.

    Deliberately hand-rolled: the matrices here are 8x8, the routine is
    deterministic across platforms, and it gives the independent
    characteristic-polynomial oracle in the tests something to check.
    """
    m = np.array(matrix, dtype=complex)
    n = m.shape[0]
    if m.ndim != 2 or m.shape[1] != n:
        raise ValueError("matrix must be square")
    herm_defect = np.max(np.abs(m - m.conj().T))
    if herm_defect > 1e-8:
        raise ValueError(f"matrix is not Hermitian (defect {herm_defect:.3e})")
    m = 0.5 * (m + m.conj().T)
    # entries smaller than this cannot push the off-diagonal norm above tol
    skip = 0.25 * tol / n
    for _ in range(max_sweeps):
        off = np.linalg.norm(m - np.diag(np.diagonal(m)))
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = m[p, q]
                if abs(b) <= skip:
                    continue
                phase = b / abs(b)
                theta = 0.5 * np.arctan2(2.0 * abs(b), (m[q, q] - m[p, p]).real)
                c = np.cos(theta)
                s = np.sin(theta)
                mp = m[:, p].copy()
                mq = m[:, q].copy()
                m[:, p] = c * mp - s * np.conj(phase) * mq
                m[:, q] = s * phase * mp + c * mq
                rp = m[p, :].copy()
                rq = m[q, :].copy()
                m[p, :] = c * rp - s * phase * rq
                m[q, :] = s * np.conj(phase) * rp + c * rq
    else:
        raise ArithmeticError(f"Jacobi sweeps did not converge in {max_sweeps} passes")
    return np.sort(np.diagonal(m).real)


def pt_spectrum(rho):
    """Ascending eigenvalues of the partial transpose of ``rho``."""
    return hermitian_eigenvalues(partial_transpose_first(rho))


def negativity(rho):
    """1|23 negativity: max(0, -2 * sum of negative PT eigenvalues).

    Zero for PPT states, 1 for the GHZ state, 2*sqrt(2)/3 for the W state.
    For the states these dissipative dynamics produce at most one eigenvalue
    goes negative; the sum convention is kept anyway since it is the
    definition, and the count is merely a monitored property.
    """
    lam = pt_spectrum(rho)
    neg = lam[lam < 0.0].sum()
    return max(0.0, -2.0 * float(neg))


def negative_eigenvalue_count(rho):
    """Number of PT eigenvalues below -1e-12, for monitoring."""
    lam = pt_spectrum(rho)
    return int(np.sum(lam < -1e-12))
