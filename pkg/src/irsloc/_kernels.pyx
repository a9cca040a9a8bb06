# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of _kernels_py: steering batches and the MUSIC scan.

Steering phases are quadratic in the element index, so each column is built
with a two-term complex recurrence (two multiplies per element) instead of a
cos/sin pair per element. The scan walks the grid in fixed-size chunks and
hands the two dense products per chunk to numpy's BLAS; memory stays
O((M_I + D) * chunk) regardless of grid size.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin, isinf

cnp.import_array()

cdef enum:
    CHUNK = 1024


cdef inline void _fill_column(double complex * col, Py_ssize_t m_elem,
                              double k_wave, double spacing,
                              double d, double theta):
    """a_m = exp(-i (alpha m + beta m^2)) via a_{m+1} = a_m r_m, r_{m+1} = r_m q."""
    cdef double c_th = cos(theta)
    cdef double s_th = sin(theta)
    cdef double curv = 0.0 if isinf(d) else s_th * s_th / (2.0 * d)
    cdef double alpha = k_wave * spacing * c_th
    cdef double beta = k_wave * spacing * spacing * curv
    cdef double complex a = 1.0
    cdef double complex r = cos(alpha + beta) - 1j * sin(alpha + beta)
    cdef double complex q = cos(2.0 * beta) - 1j * sin(2.0 * beta)
    cdef Py_ssize_t m
    col[0] = a
    for m in range(1, m_elem):
        a = a * r
        r = r * q
        col[m] = a


def steering_batch(double wavelength, double spacing, int m_elem, d, theta):
    cdef cnp.ndarray[double, ndim=1] dd = np.ascontiguousarray(d, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] th = np.ascontiguousarray(theta, dtype=np.float64)
    cdef Py_ssize_t n_pts = dd.shape[0]
    cdef cnp.ndarray[complex, ndim=2] out = np.empty((m_elem, n_pts), dtype=np.complex128)
    cdef double k_wave = 2.0 * np.pi / wavelength
    cdef double complex[:, ::1] ov = out
    cdef double complex col[4096]
    cdef Py_ssize_t g, m
    if m_elem > 4096:
        raise ValueError("steering batch supports at most 4096 elements")
    for g in range(n_pts):
        _fill_column(col, m_elem, k_wave, spacing, dd[g], th[g])
        for m in range(m_elem):
            ov[m, g] = col[m]
    return out


def music_scan(p_matrix, u_noise, double wavelength, double spacing, d, theta,
               double den_floor=1e-18, double sentinel=1e18):
    cdef cnp.ndarray[complex, ndim=2] p = np.ascontiguousarray(p_matrix, dtype=np.complex128)
    uh = np.ascontiguousarray(u_noise.conj().T.astype(np.complex128, copy=False))
    cdef cnp.ndarray[double, ndim=1] dd = np.ascontiguousarray(d, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] th = np.ascontiguousarray(theta, dtype=np.float64)
    cdef Py_ssize_t n_pts = dd.shape[0]
    cdef Py_ssize_t dim = p.shape[0]
    cdef Py_ssize_t m_elem = p.shape[1]
    cdef Py_ssize_t n_noise = uh.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n_pts, dtype=np.float64)
    cdef cnp.ndarray[complex, ndim=2] a_buf = np.empty((m_elem, CHUNK), dtype=np.complex128)
    cdef double complex[:, ::1] av = a_buf
    cdef double k_wave = 2.0 * np.pi / wavelength
    cdef double complex[:, :] psiv
    cdef double complex[:, :] projv
    cdef double num, den
    cdef double complex z
    cdef Py_ssize_t start, b, n_b, g, i, j
    cdef double complex col[4096]
    if m_elem > 4096:
        raise ValueError("music scan supports at most 4096 elements")

    for start in range(0, n_pts, CHUNK):
        n_b = min(CHUNK, n_pts - start)
        for b in range(n_b):
            g = start + b
            _fill_column(col, m_elem, k_wave, spacing, dd[g], th[g])
            for i in range(m_elem):
                av[i, b] = col[i]
        block = a_buf if n_b == CHUNK else a_buf[:, :n_b]
        psi = np.dot(p, block)
        proj = np.dot(uh, psi)
        psiv = psi
        projv = proj
        for b in range(n_b):
            num = 0.0
            for i in range(dim):
                z = psiv[i, b]
                num += z.real * z.real + z.imag * z.imag
            den = 0.0
            for j in range(n_noise):
                z = projv[j, b]
                den += z.real * z.real + z.imag * z.imag
            out[start + b] = sentinel if den < den_floor else num / den
    return out
