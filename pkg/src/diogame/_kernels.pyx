# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops.  Callers guarantee |q' p_i| < 2**62."""

from libc.math cimport pow as cpow
from libc.stdlib cimport llabs

cdef double MARGIN = 1e-9


def dominator_scan(long long q, list p, list r, double c):
    cdef int d = len(p)
    cdef long long[16] pp
    cdef double[16] rr
    cdef long long qp, t, num, diff, half = q // 2
    cdef double cq = c * q * (1.0 + MARGIN)
    cdef int i
    cdef bint ok
    if d > 16:
        raise ValueError("dimension above 16 not supported by the compiled kernel")
    for i in range(d):
        pp[i] = p[i]
        rr[i] = r[i]
    out = []
    for qp in range(1, q):
        ok = True
        for i in range(d):
            t = qp * pp[i]
            # floor division toward -inf for negative t
            num = t + half
            if num >= 0:
                num = num // q
            else:
                num = -((-num + q - 1) // q)
            diff = llabs(num * q - t)
            if diff > cq * cpow(<double>qp, -rr[i]) + 1e-300:
                ok = False
                break
        if ok:
            out.append(qp)
    return out
