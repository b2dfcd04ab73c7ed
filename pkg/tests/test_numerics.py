import math

import mpmath
import numpy as np
import pytest

from qmiddle.errors import DivergenceError, KernelPoleError, ZeroDivisionThresholdError
from qmiddle.numerics import Truncation, p_lambda, p_lambda_array, q_pochhammer, safe_div


def mp_qp(a, q, n=None):
    return complex(mpmath.qp(mpmath.mpc(a), mpmath.mpc(q), n) if n is not None
                   else mpmath.qp(mpmath.mpc(a), mpmath.mpc(q)))


@pytest.mark.parametrize("a,q,n", [(0.3, 0.5, 7), (0.2 + 0.9j, 0.4 - 0.3j, 25), (-1.7, 0.6j, 3)])
def test_finite_pochhammer_matches_mpmath(a, q, n):
    assert abs(q_pochhammer(a, q, n) - mp_qp(a, q, n)) <= 1e-13 * abs(mp_qp(a, q, n))


def test_infinite_pochhammer_matches_mpmath():
    for a, q in [(0.3, 0.5), (1.5 - 0.2j, 0.35 + 0.4j), (2.0j, -0.6)]:
        ref = mp_qp(a, q)
        assert abs(q_pochhammer(a, q) - ref) <= 1e-12 * abs(ref)


def test_pochhammer_edge_cases():
    assert q_pochhammer(0.3, 0.5, 0) == 1
    assert q_pochhammer(1.0, 0.5, 4) == 0
    with pytest.raises(DivergenceError):
        q_pochhammer(0.3, 1.2)
    with pytest.raises(ValueError):
        q_pochhammer(0.3, 0.5, -1)


def test_kernel_matches_pochhammer_ratio():
    q, ql = 0.45 * np.exp(0.8j), 0.6 - 0.3j
    for x, s in [(1.1, 0.5j), (0.3 + 0.2j, 4.0), (2.0, 17.0 - 3j)]:
        ref = mp_qp(q * ql * s / x, q) / mp_qp(q * s / x, q)
        assert abs(p_lambda(x, s, ql, q) - ref) <= 1e-11 * abs(ref)


def test_kernel_shift_relation():
    # P(x, s/q) = (x - q^lambda s) / (x - s) P(x, s)
    q, ql, x = 0.5 * np.exp(0.3j), 0.7j, 1.2 - 0.4j
    s = 0.8 * np.exp(1j) * q ** np.arange(-10, 10).astype(float)
    lhs = p_lambda_array(x, s / q, ql, q)
    rhs = (x - ql * s) / (x - s) * p_lambda_array(x, s, ql, q)
    assert np.max(np.abs(lhs - rhs) / np.abs(rhs)) < 1e-12


def test_kernel_trivial_exponent():
    s = np.array([0.3, 2.0 + 1j, 40.0])
    assert np.allclose(p_lambda_array(1.3, s, 1.0, 0.5), 1.0)


def test_kernel_errors():
    with pytest.raises(KernelPoleError):
        p_lambda(1.0, 1 / 0.5, 0.3, 0.5)  # q s = x
    with pytest.raises(ZeroDivisionThresholdError):
        p_lambda(0.0, 1.0, 0.3, 0.5)
    with pytest.raises(DivergenceError):
        p_lambda(1.0, 0.3, 0.3, 1.5)


def test_truncation_controls_convergence():
    q, ql, x, s = 0.6, 0.3, 1.0, 0.7
    ref = mp_qp(q * ql * s / x, q) / mp_qp(q * s / x, q)
    coarse = abs(p_lambda(x, s, ql, q, Truncation(5, 10)) - ref)
    fine = abs(p_lambda(x, s, ql, q, Truncation(80, 10)) - ref)
    assert fine < 1e-13 * abs(ref) < coarse


def test_truncation_validation_and_env(monkeypatch):
    with pytest.raises(ValueError):
        Truncation(0, 10)
    monkeypatch.setenv("QMIDDLE_HALF_WIDTH", "33")
    monkeypatch.setenv("QMIDDLE_PRODUCT_TERMS", "77")
    assert Truncation.from_env() == Truncation(77, 33)


def test_safe_div():
    assert safe_div(1.0, 4.0) == 0.25
    with pytest.raises(ZeroDivisionThresholdError):
        safe_div(1.0, 1e-14)
    assert math.isclose(safe_div(1e-20, 1e-21, scale=1e-20), 10.0)
