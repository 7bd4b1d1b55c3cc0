"""Pure-numpy versions of the hot kernels.

Selected automatically by :mod:`mpplan.kernels` when the compiled
extension is not importable. Signatures and results must match
``_kernels.pyx`` exactly.
"""

import numpy as np


def first_fit(owner, links, band, width, start=0):
    """Lowest slot index ``s >= start`` such that ``owner[l, band, s:s+width]``
    is zero for every link ``l`` in ``links``; ``-1`` if none."""
    n_slots = owner.shape[2]
    if width <= 0 or width > n_slots:
        return -1
    busy = np.any(owner[links, band, :] != 0, axis=0)
    free = np.concatenate(([0], np.cumsum(~busy, dtype=np.int64)))
    # free[s + w] - free[s] == w  <=>  slots s..s+w-1 all free
    runs = free[width:] - free[:-width] == width
    if start > 0:
        runs[:start] = False
    hits = np.flatnonzero(runs)
    return int(hits[0]) if hits.size else -1


def xpm_psi_sum(f_cut, b_cut, f_int, b_int, weight, beta2_abs, l_asym):
    """Sum over interferers of ``weight * psi`` where psi is the closed-form
    GN interaction integral (without the effective-length prefactor)."""
    f_int = np.asarray(f_int, dtype=float)
    if f_int.size == 0:
        return 0.0
    b_int = np.asarray(b_int, dtype=float)
    weight = np.asarray(weight, dtype=float)
    a = np.pi ** 2 * l_asym * beta2_abs * b_cut
    df = f_int - f_cut
    psi = 0.5 * (np.arcsinh(a * (df + 0.5 * b_int)) - np.arcsinh(a * (df - 0.5 * b_int)))
    return float(np.dot(weight, psi))
