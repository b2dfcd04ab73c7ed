import json

import numpy as np
import pytest

from qmiddle.errors import ConstraintError, DegenerateParameterError, RankError
from qmiddle.qpvi import (QPVIParams, build_A, build_B, js_scalar_equation, kernel_vectors,
                          random_qpvi_params, scalar_reduce, y1_equation)


def test_random_draws_satisfy_constraint(rng):
    for _ in range(20):
        p = random_qpvi_params(rng)
        assert p.check() is p
        assert p.constraint_residual() < 1e-14


def test_constraint_violation_named(rng):
    p = random_qpvi_params(rng).replace(a3=3.0)
    with pytest.raises(ConstraintError, match="theta1\\*theta2"):
        p.check()


def test_degenerate_inputs(rng):
    p = random_qpvi_params(rng)
    with pytest.raises(DegenerateParameterError):
        p.replace(y=0).check()
    with pytest.raises(DegenerateParameterError):
        p.replace(a2=p.a1, a4=p.a4 * p.a2 / p.a1).check()


def test_json_roundtrip(rng):
    p = random_qpvi_params(rng)
    assert QPVIParams.from_json(json.loads(json.dumps(p.to_json()))) == p
    data = p.to_json()
    del data["w"]
    assert QPVIParams.from_json(data).w == 1


def test_leading_coefficient_and_partial_fractions(rng):
    p = random_qpvi_params(rng)
    amat, sys = build_A(p), build_B(p)
    assert np.allclose(amat.coefficients[2], np.diag([p.chi1, p.chi2]))
    for x in (0.3 + 0.1j, -1.7, 2.2j):
        lhs = sys.evaluate(x)
        rhs = amat.evaluate(x) / (p.c0 * (x - p.t * p.a1) * (x - p.t * p.a2))
        assert np.allclose(lhs, rhs, rtol=1e-12, atol=0)


def test_determinants(rng):
    for _ in range(10):
        p = random_qpvi_params(rng)
        sys = build_B(p)
        for mat in (sys.b0,) + sys.residues:
            assert abs(np.linalg.det(mat)) <= 1e-12 * np.linalg.norm(mat) ** 2
        amat = build_A(p)
        x = 0.7 - 1.1j
        expect = p.chi1 * p.chi2 * (x - p.t * p.a1) * (x - p.t * p.a2) * (x - p.a3) * (x - p.a4)
        assert abs(amat.det(x) - expect) <= 1e-11 * abs(expect)


def test_other_c0_makes_b0_regular(rng):
    p = random_qpvi_params(rng)
    sys = build_B(p, c0=2 * p.c0)
    assert abs(np.linalg.det(sys.b0)) > 1e-6 * np.linalg.norm(sys.b0) ** 2
    with pytest.raises(RankError):
        kernel_vectors(p, c0=2 * p.c0)


def test_kernel_vectors(rng):
    p = random_qpvi_params(rng)
    sys = build_B(p)
    base = p.q * p.w * p.y * p.z * p.theta1 * (p.chi1 - p.chi2)
    v0, v1, v2 = kernel_vectors(p)
    for mat, v in zip((sys.b0,) + sys.residues, (v0, v1, v2)):
        assert np.linalg.norm(mat @ v) <= 1e-12 * np.linalg.norm(mat) * np.linalg.norm(v)
    assert np.isclose(v0[0], base) and np.isclose(v1[0], p.chi2 * base) and np.isclose(v2[0], p.chi2 * base)


def test_scalar_equation_closed_form_matches_elimination(rng):
    # the generic elimination of y2 is an independent oracle for the closed form
    p = random_qpvi_params(rng)
    closed = js_scalar_equation(p, p.c0)
    generic = scalar_reduce(build_B(p), p.q)
    for x in (0.4 + 0.9j, -1.3 + 0.2j, 2.1):
        a, b = np.array(closed.coefficients(x)), np.array(generic.coefficients(x))
        r = a / b
        assert np.max(np.abs(r - r[0])) < 1e-10 * abs(r[0])


def test_lattice_solution_satisfies_scalar_equation(rng):
    from qmiddle.jackson import js_lattice_solution, lattice_scalar_residual

    p = random_qpvi_params(rng)
    y = js_lattice_solution(p, rng, 8)
    assert lattice_scalar_residual(y.component(0), y1_equation(p)) < 1e-10
