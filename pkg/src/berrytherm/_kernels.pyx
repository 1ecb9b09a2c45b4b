# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled banded von Neumann right-hand side.

Storage layout and conventions match :mod:`berrytherm._kernels_py`.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


cdef inline double complex _xm(const double complex[:, :, :, ::1] R, int i, int k, int a, int b, int Nd,
                               double complex ca, double complex cac, const double[::1] sq) noexcept nogil:
    # (X R[i, k])[a, b]
    cdef double complex s = 0
    if a + 1 < Nd:
        s = s + ca * sq[a + 1] * R[i, k, a + 1, b]
    if a > 0:
        s = s + cac * sq[a] * R[i, k, a - 1, b]
    return s


cdef inline double complex _mx(const double complex[:, :, :, ::1] R, int i, int k, int a, int b, int Nd,
                               double complex ca, double complex cac, const double[::1] sq) noexcept nogil:
    # (R[i, k] X)[a, b]
    cdef double complex s = 0
    if b > 0:
        s = s + ca * sq[b] * R[i, k, a, b - 1]
    if b + 1 < Nd:
        s = s + cac * sq[b + 1] * R[i, k, a, b + 1]
    return s


def liouvillian_band(const double complex[:, :, :, ::1] R, double g, double complex ca,
                     double complex cf, double complex[:, :, :, ::1] out=None):
    """``-i [H_I, rho]`` in banded storage, truncated to the band."""
    cdef int N = R.shape[0], W = R.shape[1], Nd = R.shape[2]
    cdef int K = (W - 1) // 2
    cdef int i, kk, j, a, b
    cdef double complex hr, rh
    cdef double complex cac = ca.conjugate(), cfc = cf.conjugate()
    cdef double complex mig = -1j * g
    if out is None:
        out = np.zeros((N, W, Nd, Nd), dtype=np.complex128)
    cdef double[::1] sqf = np.sqrt(np.arange(N + 1, dtype=np.float64))
    cdef double[::1] sqd = np.sqrt(np.arange(Nd + 1, dtype=np.float64))
    with nogil:
        for i in range(N):
            for kk in range(W):
                j = i + kk - K
                if j < 0 or j >= N:
                    for a in range(Nd):
                        for b in range(Nd):
                            out[i, kk, a, b] = 0
                    continue
                for a in range(Nd):
                    for b in range(Nd):
                        hr = 0
                        rh = 0
                        if i + 1 < N and kk > 0:
                            hr = hr + cf * sqf[i + 1] * _xm(R, i + 1, kk - 1, a, b, Nd, ca, cac, sqd)
                        if i > 0 and kk + 1 < W:
                            hr = hr + cfc * sqf[i] * _xm(R, i - 1, kk + 1, a, b, Nd, ca, cac, sqd)
                        if kk + 1 < W and j + 1 < N:
                            rh = rh + cfc * sqf[j + 1] * _mx(R, i, kk + 1, a, b, Nd, ca, cac, sqd)
                        if kk > 0 and j > 0:
                            rh = rh + cf * sqf[j] * _mx(R, i, kk - 1, a, b, Nd, ca, cac, sqd)
                        out[i, kk, a, b] = mig * (hr - rh)
    return np.asarray(out)


def band_populations(const double complex[:, :, :, ::1] R):
    """Diagonal of ``rho`` reshaped to ``(N_f, N_d)``."""
    cdef int N = R.shape[0], W = R.shape[1], Nd = R.shape[2]
    cdef int K = (W - 1) // 2
    cdef int i, a
    pops = np.empty((N, Nd), dtype=np.float64)
    cdef double[:, ::1] p = pops
    for i in range(N):
        for a in range(Nd):
            p[i, a] = R[i, K, a, a].real
    return pops
