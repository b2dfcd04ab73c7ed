import numpy as np
import pytest

from qmiddle import jackson as jk
from qmiddle.errors import InvalidInputError, LatticePoleError, ProbeCollisionError
from qmiddle.qpvi import build_B, random_qpvi_params, y1_equation


@pytest.fixture(scope="module")
def solution():
    rng = np.random.default_rng(7)
    p = jk.convergent_qpvi_params(rng)
    return jk.boundary_free_js_solution(p, rng, 120)


def test_lattice_function_basics(rng):
    f = jk.LatticeFunction(1.0, 0.5, 3, np.arange(7.0))
    assert f.at(0)[0] == 3 and f.points[3] == 1.0
    assert f.truncated(1).values[:, 0].tolist() == [2, 3, 4]
    assert jk.LatticeFunction.from_json(f.to_json()).values.tolist() == f.values.tolist()
    with pytest.raises(InvalidInputError):
        f.truncated(5)
    with pytest.raises(InvalidInputError):
        jk.LatticeFunction(1.0, 0.5, 3, np.arange(5.0))


def test_jackson_integral_of_power():
    # int_0^xi s^k d_q s = (1 - q) xi^(k+1) / (1 - q^(k+1)) for a function vanishing beyond xi
    q, xi, k, n = 0.45 * np.exp(0.3j), 0.8 + 0.2j, 3, 60
    f = jk.LatticeFunction(xi, q, n, np.zeros(2 * n + 1))
    vals = np.where(f.indices >= 0, f.points**k, 0)
    g = jk.LatticeFunction(xi, q, n, vals)
    expect = (1 - q) * xi ** (k + 1) / (1 - q ** (k + 1))
    assert abs(complex(jk.jackson_integral(g)[0]) - expect) < 1e-14 * abs(expect)


def test_lattice_solution_is_a_solution(rng):
    p = random_qpvi_params(rng)
    y = jk.js_lattice_solution(p, rng, 10)
    sys = build_B(p)
    for n in range(-10, 10):
        assert np.allclose(y.at(n + 1), sys.evaluate(y.points[n + 10]) @ y.at(n), rtol=1e-9, atol=0)


def test_lattice_pole_detected(rng):
    p = random_qpvi_params(rng)
    with pytest.raises(LatticePoleError):
        jk.lattice_solve(build_B(p), p.t * p.a1 * p.q**-2, [1, 0], 5, p.q)


def test_boundary_free_solution(solution):
    assert solution.mismatch < 1e-10
    y, sys = solution.lattice, build_B(solution.params)
    for n in range(-y.half_width, y.half_width):
        lhs, rhs = y.at(n + 1), sys.evaluate(y.points[n + y.half_width]) @ y.at(n)
        assert np.linalg.norm(lhs - rhs) <= 1e-9 * np.linalg.norm(rhs)
    assert jk.lattice_scalar_residual(y.component(0), y1_equation(solution.params)) < 1e-9
    # the Jackson summands die off at both ends
    assert jk.scalar_transform_report(y, solution.params).tail_mass < 1e-15


@pytest.mark.parametrize("report", ["mc_vector_report", "rows_vector_report", "scalar_transform_report"])
def test_transform_residuals_decay(solution, report):
    fn = getattr(jk, report)
    r60 = fn(solution.lattice.truncated(60), solution.params)
    r120 = fn(solution.lattice, solution.params)
    assert r60.residual <= 1e-6
    assert r120.residual < r60.residual / 10 or r120.residual < 1e-12
    assert r120.tail_mass < r60.tail_mass


def test_kny_transform(solution):
    from qmiddle.weyl import js_to_kny, l1_operator

    kny = js_to_kny(solution.params, 1.2 - 0.3j, 0.6 + 0.5j)
    y = jk.kny_solution(solution.lattice, kny)
    assert jk.lattice_scalar_residual(y, l1_operator(kny)) < 1e-9
    assert jk.kny_transform_report(y.truncated(60), kny).residual < 1e-6


def test_random_seed_solution_keeps_boundary_terms(rng):
    # a generic seed leaves O(1) boundary terms, which is why the campaigns tune z
    p = jk.convergent_qpvi_params(rng)
    y = jk.js_lattice_solution(p, rng, 60)
    assert jk.scalar_transform_report(y, p).residual > 1e-4


def test_displayed_and_mapped_scalar_targets_agree(rng):
    p = random_qpvi_params(rng)
    a, b = jk.transformed_scalar_equation(p), jk.mapped_scalar_equation(p)
    for x in (0.3 + 1.2j, -0.8, 1.9 - 0.4j):
        r = np.array(a.coefficients(x)) / np.array(b.coefficients(x))
        assert np.max(np.abs(r - r[0])) < 1e-10 * abs(r[0])


def test_generic_convolution_transform(rng):
    sys, ql, q = jk.convergent_system(rng)
    y = jk.lattice_solve(sys, 0.9 + 0.1j, rng.normal(size=2) + 0j, 120, q)
    assert jk.convolution_report(sys, y.truncated(60), ql).residual < 1e-6
    assert jk.convolution_report(sys, y, ql).residual < 1e-11


def test_probe_collision(solution):
    y = solution.lattice
    with pytest.raises(ProbeCollisionError) as info:
        jk.scalar_transform(y, solution.params, y.points[5])
    assert info.value.index == 5 - y.half_width


def test_probe_points_avoid_lattice():
    probes = jk.probe_points(1.0, 0.5, 5)
    assert [pr.k for pr in probes] == [-2, -1, 0, 1, 2]
    assert abs(probes[2].value - np.sqrt(0.5)) < 1e-15


def test_depth_requires_recessive_ratio():
    with pytest.raises(InvalidInputError):
        jk._depth(1.2)
