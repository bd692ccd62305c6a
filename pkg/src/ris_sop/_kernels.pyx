# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementation of the per-trial simulation kernel.

Algorithm and random-number contract are identical to _kernels_py (see
its module docstring): Philox4x64-10 keyed by the master seed, counter
(j+1, t, 0, 0) for block j of trial t, Box-Muller pairs, coefficients
(re + j im)/sqrt(2), nearest-phase alignment by scanning the candidate
table. Only the execution strategy differs: a C loop per trial instead
of vectorized array passes, releasing the GIL so worker threads scale.
"""

import numpy as np

from libc.math cimport M_PI, cos, log, sin, sqrt
from libc.stdint cimport int64_t, uint64_t
from libc.stdlib cimport free, malloc

cdef extern from *:
    """
    #include <stdint.h>
    static inline uint64_t risop_mulhilo(uint64_t a, uint64_t b, uint64_t *hip)
    {
        __uint128_t p = (__uint128_t)a * (__uint128_t)b;
        *hip = (uint64_t)(p >> 64);
        return (uint64_t)p;
    }
    """
    uint64_t risop_mulhilo(uint64_t a, uint64_t b, uint64_t *hip) nogil

cdef uint64_t M0 = 0xD2E7470EE14C6C93ULL
cdef uint64_t M1 = 0xCA5A826395121157ULL
cdef uint64_t W0 = 0x9E3779B97F4A7C15ULL
cdef uint64_t W1 = 0xBB67AE8584CAA73BULL
cdef double TWO_M53 = 1.0 / 9007199254740992.0
cdef double INV_SQRT2 = 1.0 / sqrt(2.0)

BACKEND_NAME = "compiled"


cdef inline void philox_block(uint64_t c0, uint64_t c1, uint64_t c2, uint64_t c3,
                              uint64_t k0, uint64_t k1, uint64_t *out) nogil:
    cdef uint64_t hi0, hi1, lo0, lo1
    cdef int r
    for r in range(10):
        lo0 = risop_mulhilo(M0, c0, &hi0)
        lo1 = risop_mulhilo(M1, c2, &hi1)
        c0 = hi1 ^ c1 ^ k0
        c1 = lo1
        c2 = hi0 ^ c3 ^ k1
        c3 = lo0
        k0 = k0 + W0
        k1 = k1 + W1
    out[0] = c0
    out[1] = c1
    out[2] = c2
    out[3] = c3


cdef inline void trial_normals(uint64_t seed, uint64_t t, int n_words, double *z) nogil:
    """Fill z[0 .. n_words) with the trial's normal deviates."""
    cdef int n_blocks = (n_words + 3) >> 2
    cdef uint64_t buf[4]
    cdef int j, m, base, have
    cdef double u0, u1, r, ang
    cdef double upair[4]
    for j in range(n_blocks):
        philox_block(<uint64_t> (j + 1), t, 0, 0, seed, 0, buf)
        base = 4 * j
        have = n_words - base
        if have > 4:
            have = 4
        for m in range(4):
            upair[m] = <double> (buf[m] >> 11) * TWO_M53
        for m in range(0, have, 2):
            u0 = upair[m]
            u1 = upair[m + 1]
            r = sqrt(-2.0 * log(1.0 - u0))
            ang = (2.0 * M_PI) * u1
            z[base + m] = r * cos(ang)
            z[base + m + 1] = r * sin(ang)


def simulate_batch(seed, start_trial, n_trials, n_elements, n_phases):
    """Same contract as the numpy backend's simulate_batch."""
    cdef uint64_t seed_c = <uint64_t> (int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t t0 = <uint64_t> int(start_trial)
    cdef Py_ssize_t n = int(n_trials)
    cdef int nel = int(n_elements)
    cdef int L = int(n_phases)
    if n < 0 or nel < 1 or L < 0:
        raise ValueError("invalid kernel arguments")

    x_arr = np.empty(n, dtype=np.float64)
    y_arr = np.empty(n, dtype=np.float64)
    er_arr = np.empty(n, dtype=np.float64)
    ei_arr = np.empty(n, dtype=np.float64)
    hr_arr = np.empty(n, dtype=np.float64)
    hi_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] xv = x_arr
    cdef double[::1] yv = y_arr
    cdef double[::1] erv = er_arr
    cdef double[::1] eiv = ei_arr
    cdef double[::1] hrv = hr_arr
    cdef double[::1] hiv = hi_arr

    cdef int n_words = 6 * nel + 2
    cdef double *z = NULL
    cdef double *cos_t = NULL
    cdef double *sin_t = NULL
    cdef Py_ssize_t i
    cdef int e, k, best_k
    cdef double step, hre, him, gre, gim, pre, pim
    cdef double re, im, wre, wim, ct, st, score, best, mag, rre, rim
    cdef double X, Y, ER, EI

    z = <double *> malloc(n_words * sizeof(double))
    if L > 0:
        cos_t = <double *> malloc(L * sizeof(double))
        sin_t = <double *> malloc(L * sizeof(double))
    if z == NULL or (L > 0 and (cos_t == NULL or sin_t == NULL)):
        free(z)
        free(cos_t)
        free(sin_t)
        raise MemoryError

    with nogil:
        if L > 0:
            step = 2.0 * M_PI / L
            for k in range(L):
                cos_t[k] = cos(step * k)
                sin_t[k] = sin(step * k)
        for i in range(n):
            trial_normals(seed_c, t0 + <uint64_t> i, n_words, z)
            X = 0.0
            Y = 0.0
            ER = 0.0
            EI = 0.0
            for e in range(nel):
                hre = z[2 * e] * INV_SQRT2
                him = z[2 * e + 1] * INV_SQRT2
                gre = z[2 * nel + 2 * e] * INV_SQRT2
                gim = z[2 * nel + 2 * e + 1] * INV_SQRT2
                pre = z[4 * nel + 2 * e] * INV_SQRT2
                pim = z[4 * nel + 2 * e + 1] * INV_SQRT2
                re = hre * gre - him * gim
                im = hre * gim + him * gre
                wre = hre * pre - him * pim
                wim = hre * pim + him * pre
                if L > 0:
                    best = re * cos_t[0] - im * sin_t[0]
                    best_k = 0
                    for k in range(1, L):
                        score = re * cos_t[k] - im * sin_t[k]
                        if score > best:
                            best = score
                            best_k = k
                    ct = cos_t[best_k]
                    st = sin_t[best_k]
                    X = X + best
                    Y = Y + (re * st + im * ct)
                else:
                    mag = sqrt(re * re + im * im)
                    X = X + mag
                    if mag == 0.0:
                        ct = 1.0
                        st = 0.0
                    else:
                        ct = re / mag
                        st = -im / mag
                ER = ER + (wre * ct - wim * st)
                EI = EI + (wre * st + wim * ct)
            xv[i] = X
            yv[i] = Y if L > 0 else 0.0
            erv[i] = ER
            eiv[i] = EI
            hrv[i] = z[6 * nel] * INV_SQRT2
            hiv[i] = z[6 * nel + 1] * INV_SQRT2

    free(z)
    free(cos_t)
    free(sin_t)
    return x_arr, y_arr, er_arr, ei_arr, hr_arr, hi_arr
