import numpy as np
import pytest

from qmiddle.errors import InvalidInputError, SpecializationError
from qmiddle.qheun import (QHEUN_FIELDS, QHeunParams, accessory_from_z, boundary_free_heun_solution,
                           build_qheun, consistent_sign, embedded_constant, heun_cy1_display,
                           heun_to_qpvi, heun_transform_params, heun_transform_report, heun_y1_display,
                           qpvi_to_heun, random_qheun_params, specialize_yz)
from qmiddle.jackson import convergent_qpvi_params, lattice_scalar_residual
from qmiddle.qpvi import random_qpvi_params, rel_diff, y1_equation


def proportional(a, b, xs):
    out = 0.0
    for x in xs:
        r = np.array(a.coefficients(x)) / np.array(b.coefficients(x))
        out = max(out, np.max(np.abs(r - r[0])) / abs(r[0]))
    return out


XS = (0.4 + 1.1j, -1.3 + 0.2j, 2.0 - 0.7j)


def test_roundtrip(rng):
    for _ in range(10):
        h = random_qheun_params(rng)
        assert h.constraint_residual() < 1e-13
        back = qpvi_to_heun(heun_to_qpvi(h, theta1=0.7 + 0.3j, t=1.4j))
        assert max(rel_diff(getattr(h, k), getattr(back, k)) for k in QHEUN_FIELDS) < 1e-12
        assert back.sign == h.sign


def test_json_roundtrip(rng):
    h = random_qheun_params(rng)
    assert QHeunParams.from_json(h.to_json()) == h


def test_sign_validation(rng):
    with pytest.raises(InvalidInputError):
        random_qheun_params(rng).replace(sign=0)
    h = random_qheun_params(rng)
    with pytest.raises(SpecializationError):
        consistent_sign(h, 1.7 * h.principal_constant() * 1j)


def test_embedding_equations(rng):
    h = random_qheun_params(rng)
    p = heun_to_qpvi(h)
    assert abs(h.constant_term() - embedded_constant(h)) < 1e-12 * abs(embedded_constant(h))
    assert proportional(build_qheun(h), heun_y1_display(p, h.E), XS) < 1e-12
    assert proportional(heun_y1_display(p, h.E), y1_equation(p), XS) < 1e-12
    assert proportional(build_qheun(heun_transform_params(h)), heun_cy1_display(p, h.E), XS) < 1e-12


def test_accessory_readback(rng):
    p = random_qpvi_params(rng)
    y, z = specialize_yz(p, 0.37 - 0.2j)
    assert abs(accessory_from_z(p.replace(y=y, z=z)) - (0.37 - 0.2j)) < 1e-12
    with pytest.raises(SpecializationError):
        accessory_from_z(p.replace(y=2 * p.a3 + 1))


def test_displayed_primed_tuple_breaks_constraint(rng):
    # the displayed h3' = l4/(q h3) fails l1'l2'l3'l4' = h1'h2'h3' q^2 unless h3^2 = 1;
    # h3' = l4 h3 / q would satisfy it (see the decisions ledger)
    h = random_qheun_params(rng)
    primed = heun_transform_params(h)
    assert primed.constraint_residual() > 1e-3
    assert primed.replace(h3=h.l4 * h.h3 / h.q).constraint_residual() < 1e-12
    unit = h.replace(h3=1.0, l4=h.l4 / h.h3)
    assert heun_transform_params(unit).constraint_residual() < 1e-12


def test_heun_transform():
    rng = np.random.default_rng(11)
    p = convergent_qpvi_params(rng)
    h = qpvi_to_heun(p.replace(y=p.a3))
    tuned, sol = boundary_free_heun_solution(h, rng, 120)
    assert lattice_scalar_residual(sol.lattice, build_qheun(tuned)) < 1e-9
    r60 = heun_transform_report(sol.lattice.truncated(60), tuned)
    r120 = heun_transform_report(sol.lattice, tuned)
    assert r60.residual <= 1e-6 and r120.residual < r60.residual / 10
