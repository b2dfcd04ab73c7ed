"""Property-based checks over random parameters drawn by hypothesis."""
import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from qmiddle.engine import parameter_map_mc
from qmiddle.errors import QMiddleError
from qmiddle.numerics import q_pochhammer
from qmiddle.qpvi import random_qpvi_params
from qmiddle.weyl import apply_generator, deviation, js_to_kny

seeds = st.integers(min_value=0, max_value=2**32 - 1)
moduli = st.floats(min_value=0.2, max_value=0.8)
phases = st.floats(min_value=0, max_value=2 * np.pi)


@given(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), moduli, phases,
       st.integers(min_value=0, max_value=40))
def test_pochhammer_recurrence(a, r, phi, n):
    q = r * np.exp(1j * phi)
    lhs = q_pochhammer(a, q, n + 1)
    rhs = q_pochhammer(a, q, n) * (1 - a * q**n)
    assert abs(lhs - rhs) <= 1e-12 * max(abs(rhs), 1e-300) + 1e-300


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_generators_are_involutions(seed):
    k = js_to_kny(random_qpvi_params(np.random.default_rng(seed)))
    for i in range(6):
        try:
            back = apply_generator(i, apply_generator(i, k))
        except QMiddleError:
            continue
        assert deviation(back, k) < 1e-10


@settings(max_examples=60, deadline=None)
@given(seeds, st.complex_numbers(min_magnitude=0.3, max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_parameter_map_preserves_constraint(seed, c):
    p = random_qpvi_params(np.random.default_rng(seed))
    try:
        new = parameter_map_mc(p, c, "chi2")
    except QMiddleError:
        return
    assert new.constraint_residual() < 1e-10
