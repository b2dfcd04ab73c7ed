# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: the q-Pochhammer kernel on a lattice and the
sequential matrix recursion used by lattice solutions."""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, ceil, fabs

from .errors import KernelPoleError

cnp.import_array()

cdef double ZETA = 1e-12


cdef inline double cabs(double complex z) nogil:
    return (z.real * z.real + z.imag * z.imag) ** 0.5


def qpoch(a, q, long n):
    cdef double complex ca = a, cq = q
    cdef double complex result = 1.0, qi = 1.0
    cdef long i
    for i in range(n):
        result *= 1.0 - ca * qi
        qi *= cq
    return complex(result)


def p_lambda_array(x, s, q_lambda, q, long product_terms):
    cdef double complex cx = x, cq = q, cql = q_lambda
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] sv = np.ascontiguousarray(
        np.ravel(np.asarray(s, dtype=np.complex128)))
    cdef Py_ssize_t n = sv.shape[0], k
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(n, dtype=np.complex128)
    cdef double absx = cabs(cx), absq = cabs(cq), ratio, scale
    cdef long count, i, bad = -1
    cdef double complex term, den, acc
    with nogil:
        for k in range(n):
            ratio = cabs(sv[k]) / absx
            count = product_terms
            if ratio > 1.0:
                count += <long>ceil(log(ratio) / -log(absq))
            term = cq * sv[k]
            acc = 1.0
            for i in range(count):
                den = cx - term
                scale = absx if absx > cabs(term) else cabs(term)
                if cabs(den) <= ZETA * scale:
                    bad = i
                    break
                acc *= (cx - cql * term) / den
                term *= cq
            if bad >= 0:
                break
            out[k] = acc
    if bad >= 0:
        raise KernelPoleError(bad)
    return out.reshape(np.shape(s))


def chain(mats, y0):
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] mv = np.ascontiguousarray(mats, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] y = np.array(y0, dtype=np.complex128)
    cdef Py_ssize_t steps = mv.shape[0], m = y.shape[0], k, r, c
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] out = np.empty((steps + 1, m), dtype=np.complex128)
    cdef double complex acc
    with nogil:
        for r in range(m):
            out[0, r] = y[r]
        for k in range(steps):
            for r in range(m):
                acc = 0.0
                for c in range(m):
                    acc = acc + mv[k, r, c] * out[k, c]
                out[k + 1, r] = acc
    return out
