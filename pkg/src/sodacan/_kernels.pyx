# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled explicit-step kernel; mirrors _fallback.rates."""

from libc.math cimport pow, fabs, sqrt


cdef inline double _flux_power(double x, double e) nogil:
    # p = 2 and p = 3 are common enough to skip the general pow
    if e == 0.0:
        return 1.0
    if e == 0.5:
        return sqrt(x)
    return pow(x, e)


cdef inline double _ipow(double x, int k) nogil:
    cdef double out = 1.0
    while k > 0:
        out *= x
        k -= 1
    return out


def rates(double[::1] u, double[::1] r, Py_ssize_t lo, Py_ssize_t hi,
          double rL, double uL, double rR, double uR, bint axis_left,
          double n, double p, double g, double[::1] du):
    cdef Py_ssize_t i
    cdef double ri, hl, hr, sl, sr, al, ar, dl, dr, wl, wr, half, c
    cdef double cmax = 0.0
    cdef double e = (p - 2.0) / 2.0
    cdef double g2 = g * g
    cdef double dconst = pow(g, p - 2.0)
    cdef long clamps = 0
    cdef double rpos, rval
    cdef int k = <int>(n - 1.0)
    cdef bint int_dim = (n - 1.0) == k and k >= 0
    if hi <= lo:
        return 0.0, 0
    # the left face of node lo; later nodes reuse the right face of their neighbour
    hl = r[lo] - rL
    sl = (u[lo] - uL) / hl if hl != 0.0 else 0.0
    al = _flux_power(g2 + sl * sl, e)
    dl = (p - 1.0) * al if p >= 2.0 else dconst
    for i in range(lo, hi):
        ri = r[i]
        if i + 1 < hi:
            rpos = r[i + 1]
            rval = u[i + 1]
        else:
            rpos = rR
            rval = uR
        hr = rpos - ri
        sr = (rval - u[i]) / hr
        ar = _flux_power(g2 + sr * sr, e)
        dr = (p - 1.0) * ar if p >= 2.0 else dconst
        if fabs(sr) < g:
            clamps += 1
        if i == lo and axis_left and ri == 0.0:
            du[i] = n * ar * sr / (hr / 2.0)
            c = n * dr / (hr * hr / 2.0)
            if c > cmax:
                cmax = c
        else:
            if fabs(sl) < g:
                clamps += 1
            if int_dim:
                wl = _ipow((ri - hl / 2.0) / ri, k)
                wr = _ipow((ri + hr / 2.0) / ri, k)
            else:
                wl = pow((ri - hl / 2.0) / ri, n - 1.0)
                wr = pow((ri + hr / 2.0) / ri, n - 1.0)
            half = (hl + hr) / 2.0
            du[i] = (wr * ar * sr - wl * al * sl) / half
            c = (wr * dr / hr + wl * dl / hl) / half
            if c > cmax:
                cmax = c
        hl, sl, al, dl = hr, sr, ar, dr
    return cmax, clamps
