# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Mirrors ``_kernels_py`` one-to-one."""

from libc.math cimport asinh, M_PI

cimport numpy as cnp
import numpy as np

cnp.import_array()


def first_fit(const int[:, :, ::1] owner, links, int band, int width, int start=0):
    cdef Py_ssize_t n_slots = owner.shape[2]
    cdef Py_ssize_t[::1] lk = np.ascontiguousarray(links, dtype=np.intp)
    cdef Py_ssize_t n_links = lk.shape[0]
    cdef Py_ssize_t s, j, run = 0, run_start
    cdef bint busy
    if width <= 0 or width > n_slots:
        return -1
    if start < 0:
        start = 0
    run_start = start
    for s in range(start, n_slots):
        busy = False
        for j in range(n_links):
            if owner[lk[j], band, s] != 0:
                busy = True
                break
        if busy:
            run = 0
            run_start = s + 1
        else:
            run += 1
            if run == width:
                return run_start
    return -1


def xpm_psi_sum(double f_cut, double b_cut, f_int, b_int, weight,
                double beta2_abs, double l_asym):
    cdef double[::1] fk = np.ascontiguousarray(f_int, dtype=np.float64)
    cdef double[::1] bk = np.ascontiguousarray(b_int, dtype=np.float64)
    cdef double[::1] wk = np.ascontiguousarray(weight, dtype=np.float64)
    cdef Py_ssize_t k, n = fk.shape[0]
    cdef double a = M_PI * M_PI * l_asym * beta2_abs * b_cut
    cdef double df, acc = 0.0
    for k in range(n):
        df = fk[k] - f_cut
        acc += wk[k] * 0.5 * (asinh(a * (df + 0.5 * bk[k])) - asinh(a * (df - 0.5 * bk[k])))
    return acc
