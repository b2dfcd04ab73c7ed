"""Scalar arithmetic, q-Pochhammer symbols and the integral kernel.

All values are double-precision complex (``complex`` / ``numpy.complex128``).
Exponent parameters are never stored: the kernel takes ``q_lambda`` = q**lambda
directly, so no logarithm branch is ever chosen.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import DivergenceError, ZeroDivisionThresholdError

ComplexScalar = complex

#: relative threshold for every "is zero" / "is a pole" decision
ZETA = 1e-12

DEFAULT_PRODUCT_TERMS = 120
DEFAULT_HALF_WIDTH = 60


@dataclass(frozen=True)
class Truncation:
    """Truncation of infinite products and bilateral Jackson sums.

    ``product_terms`` counts kernel factors once they have started to
    converge (see :func:`p_lambda`); ``half_width`` is N in n = -N..N.
    """

    product_terms: int = DEFAULT_PRODUCT_TERMS
    half_width: int = DEFAULT_HALF_WIDTH

    def __post_init__(self):
        if self.product_terms < 1 or self.half_width < 1:
            raise ValueError("Truncation requires product_terms >= 1 and half_width >= 1")

    @classmethod
    def from_env(cls) -> "Truncation":
        return cls(
            int(os.environ.get("QMIDDLE_PRODUCT_TERMS", DEFAULT_PRODUCT_TERMS)),
            int(os.environ.get("QMIDDLE_HALF_WIDTH", DEFAULT_HALF_WIDTH)),
        )

    def with_half_width(self, n: int) -> "Truncation":
        return Truncation(self.product_terms, n)


DEFAULT_TRUNCATION = Truncation()


def is_zero(value, scale=1.0, zeta=ZETA) -> bool:
    return abs(value) <= zeta * abs(scale)


def safe_div(num, den, scale=None, what="denominator"):
    """``num / den``, raising instead of producing inf/NaN.

    ``scale`` is the local magnitude the denominator is compared against;
    it defaults to ``max(|num|, 1)``.
    """
    if scale is None:
        scale = max(abs(num), 1.0)
    if is_zero(den, scale):
        raise ZeroDivisionThresholdError(f"{what} vanishes (|{what}| = {abs(den):.3e})")
    return num / den


def q_pochhammer(a, q, n=math.inf, trunc: Truncation = DEFAULT_TRUNCATION) -> complex:
    """(a; q)_n = prod_{i=0}^{n-1} (1 - a q^i); ``n = inf`` is truncated.

    >>> q_pochhammer(0.3, 0.5, 0)
    (1+0j)
    """
    if n == math.inf:
        if abs(q) >= 1:
            raise DivergenceError("(a; q)_inf requires |q| < 1")
        n = trunc.product_terms
    if n < 0:
        raise ValueError("n must be non-negative")
    return kernels.qpoch(complex(a), complex(q), int(n))


def p_lambda_array(x, s, q_lambda, q, trunc: Truncation = DEFAULT_TRUNCATION) -> np.ndarray:
    """Vectorised :func:`p_lambda` over an array of ``s`` values."""
    if x == 0:
        raise ZeroDivisionThresholdError("kernel requires x != 0")
    if abs(q) >= 1:
        raise DivergenceError("kernel requires |q| < 1")
    return kernels.p_lambda_array(complex(x), s, complex(q_lambda), complex(q), trunc.product_terms)


def p_lambda(x, s, q_lambda, q, trunc: Truncation = DEFAULT_TRUNCATION) -> complex:
    """Kernel P(x, s) = (q^{lambda+1} s/x; q)_inf / (q s/x; q)_inf.

    Evaluated as prod_i (x - q^{i+1} q_lambda s) / (x - q^{i+1} s). Factors
    are taken until |q^{i+1} s| < |x| and then ``trunc.product_terms`` more,
    so the relative truncation error is uniform over a lattice in ``s``.
    A vanishing denominator raises :class:`KernelPoleError` with index i.
    """
    return complex(p_lambda_array(x, np.array([s], dtype=np.complex128), q_lambda, q, trunc)[0])
