"""Pure-Python / numpy implementations of the hot kernels.

Mirrors ``_kernels.pyx`` exactly; selected when the compiled module is
unavailable or ``QMIDDLE_PURE_PYTHON=1`` is set.
"""
import math

import numpy as np

from .errors import KernelPoleError

ZETA = 1e-12


def qpoch(a, q, n):
    a = complex(a)
    q = complex(q)
    result = 1.0 + 0.0j
    qi = 1.0 + 0.0j
    for _ in range(n):
        result *= 1.0 - a * qi
        qi *= q
    return result


def _extra_factors(x, s, q, product_terms):
    # factors needed before |q^{i+1} s| drops below |x|
    absq = abs(q)
    ratio = np.abs(s) / abs(x)
    with np.errstate(divide="ignore"):
        extra = np.ceil(np.log(np.maximum(ratio, 1e-300)) / -math.log(absq))
    extra = np.where(ratio > 1.0, extra, 0.0)
    return product_terms + extra.astype(np.int64)


def p_lambda_array(x, s, q_lambda, q, product_terms):
    x = complex(x)
    q = complex(q)
    q_lambda = complex(q_lambda)
    s = np.asarray(s, dtype=np.complex128)
    counts = _extra_factors(x, s, q, product_terms)
    out = np.ones(s.shape, dtype=np.complex128)
    term = q * s
    absx = abs(x)
    for i in range(int(counts.max()) if counts.size else 0):
        active = counts > i
        den = x - term
        scale = np.maximum(absx, np.abs(term))
        bad = active & (np.abs(den) <= ZETA * scale)
        if bad.any():
            raise KernelPoleError(i)
        ratio = (x - q_lambda * term) / np.where(active, den, 1.0)
        out = np.where(active, out * ratio, out)
        term = term * q
    return out


def chain(mats, y0):
    mats = np.asarray(mats, dtype=np.complex128)
    y = np.asarray(y0, dtype=np.complex128).copy()
    out = np.empty((mats.shape[0] + 1, y.shape[0]), dtype=np.complex128)
    out[0] = y
    for k in range(mats.shape[0]):
        y = mats[k] @ y
        out[k + 1] = y
    return out
