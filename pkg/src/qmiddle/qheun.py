"""The q-Heun equation and its integral transformation.

    (x - h1 q^1/2)(x - h2 q^1/2) g(x/q) + l3 l4 (x - l1 q^-1/2)(x - l2 q^-1/2) g(qx)
      - {(l3 + l4) x^2 + l3 l4 E x + C} g(x) = 0,

C = sign * (l1 l2 l3 l4 h1 h2)^1/2 (h3^1/2 + h3^-1/2) with principal roots.
The displayed constant only fixes C up to sign, so the sign is carried
explicitly: the embedding into q-Painleve VI pins it, and with it the sign
of the transformed equation (see :func:`consistent_sign`).
"""
from __future__ import annotations

import cmath
import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import ConstraintError, DegenerateParameterError, InvalidInputError, SpecializationError
from .numerics import DEFAULT_TRUNCATION, ZETA, Truncation
from .qpvi import QPVIParams, ScalarThreeTerm, parse_complex, random_qpvi_params, rel_diff

QHEUN_FIELDS = ("q", "h1", "h2", "h3", "l1", "l2", "l3", "l4", "E")


@dataclass(frozen=True)
class QHeunParams:
    """q-Heun data with l1 l2 l3 l4 = h1 h2 h3 q^2; ``sign`` picks the root of C."""

    q: complex
    h1: complex
    h2: complex
    h3: complex
    l1: complex
    l2: complex
    l3: complex
    l4: complex
    E: complex
    sign: int = 1

    def __post_init__(self):
        for name in QHEUN_FIELDS:
            object.__setattr__(self, name, complex(getattr(self, name)))
        if self.sign not in (1, -1):
            raise InvalidInputError("sign must be +1 or -1")

    def constraint_residual(self) -> float:
        rhs = self.h1 * self.h2 * self.h3 * self.q**2
        return abs(self.l1 * self.l2 * self.l3 * self.l4 - rhs) / abs(rhs)

    def check(self, tol: float = 1e3 * ZETA) -> "QHeunParams":
        for name in QHEUN_FIELDS[:-1]:
            if getattr(self, name) == 0:
                raise DegenerateParameterError(f"parameter {name} must be nonzero")
        if self.constraint_residual() > tol:
            raise ConstraintError("l1 l2 l3 l4 = h1 h2 h3 q^2", self.constraint_residual())
        return self

    @property
    def sqrt_q(self) -> complex:
        return cmath.sqrt(self.q)

    def principal_constant(self) -> complex:
        root = cmath.sqrt(self.l1 * self.l2 * self.l3 * self.l4 * self.h1 * self.h2)
        r3 = cmath.sqrt(self.h3)
        return root * (r3 + 1 / r3)

    def constant_term(self) -> complex:
        return self.sign * self.principal_constant()

    def replace(self, **changes) -> "QHeunParams":
        return dataclasses.replace(self, **changes)

    def to_json(self) -> dict:
        out = {name: [getattr(self, name).real, getattr(self, name).imag] for name in QHEUN_FIELDS}
        out["sign"] = self.sign
        return out

    @classmethod
    def from_json(cls, data: dict) -> "QHeunParams":
        kwargs = {name: parse_complex(data[name]) for name in QHEUN_FIELDS}
        return cls(sign=int(data.get("sign", 1)), **kwargs)


def build_qheun(p: QHeunParams) -> ScalarThreeTerm:
    """Coefficients exactly as displayed; c_plus multiplies g(qx)."""
    q, sq = p.q, p.sqrt_q
    cst = p.constant_term()
    return ScalarThreeTerm(
        lambda x: p.l3 * p.l4 * (x - p.l1 / sq) * (x - p.l2 / sq),
        lambda x: -((p.l3 + p.l4) * x**2 + p.l3 * p.l4 * p.E * x + cst),
        lambda x: (x - p.h1 * sq) * (x - p.h2 * sq),
        q,
    )


def consistent_sign(p: QHeunParams, target) -> int:
    """The sign for which the displayed constant equals ``target``."""
    ratio = target / p.principal_constant()
    sign = 1 if ratio.real > 0 else -1
    if abs(ratio - sign) > 1e-6:
        raise SpecializationError(f"constant term is not +-{target}: ratio {ratio}")
    return sign


def embedded_constant(p: QHeunParams) -> complex:
    """The constant the q-PVI y1 equation delivers: l3 l4 t^2 a1 a2 (1 + theta2/theta1),
    i.e. l1 l2 l3 l4 (1 + 1/h3) / q."""
    return p.l1 * p.l2 * p.l3 * p.l4 * (1 + 1 / p.h3) / p.q


# ---------------------------------------------------------------------------
# embedding into q-Painleve VI


def specialize_yz(p: QPVIParams, E) -> tuple:
    """(y, z) = (a3, (t a1 - a3)(t a2 - a3) / (q t (theta1 + theta2) + a3^2 (q chi1 + chi2)
    + E q theta1 a3 / (t a1 a2)))."""
    ta12 = p.t * p.a1 * p.a2
    den = (p.q * p.t * (p.theta1 + p.theta2) + p.a3**2 * (p.q * p.chi1 + p.chi2)
           + E * p.q * p.theta1 * p.a3 / ta12)
    num = (p.t * p.a1 - p.a3) * (p.t * p.a2 - p.a3)
    scale = abs(p.q * p.t * (p.theta1 + p.theta2)) + abs(p.a3**2 * (p.q * p.chi1 + p.chi2)) + abs(E * p.q * p.theta1 * p.a3 / ta12)
    if abs(den) <= ZETA * max(scale, 1.0):
        raise SpecializationError("the z specialisation has a vanishing denominator")
    return p.a3, num / den


def accessory_from_z(p: QPVIParams) -> complex:
    """E read back from z on the specialised locus y = a3."""
    if rel_diff(p.y, p.a3) > 1e3 * ZETA:
        raise SpecializationError("the q-Heun locus needs y = a3")
    ta12 = p.t * p.a1 * p.a2
    rest = (p.t * p.a1 - p.a3) * (p.t * p.a2 - p.a3) / p.z - p.q * p.t * (p.theta1 + p.theta2) - p.a3**2 * (p.q * p.chi1 + p.chi2)
    return rest * ta12 / (p.q * p.theta1 * p.a3)


def heun_to_qpvi(h: QHeunParams, theta1=1.0, t=1.0, w=1.0) -> QPVIParams:
    """The specialised q-PVI tuple: a3 = h1 q^1/2, a4 = h2 q^-1/2, t a_i = l_i q^-1/2,
    l3 = theta1/(chi1 t a1 a2), l4 = q theta1/(chi2 t a1 a2), h3 = theta1/theta2.
    Only ratios of theta1 to the chi are fixed; theta1 and t are gauges."""
    sq, q = h.sqrt_q, h.q
    t, theta1 = complex(t), complex(theta1)
    a1, a2 = h.l1 / (sq * t), h.l2 / (sq * t)
    ta12 = t * a1 * a2
    base = QPVIParams(q=q, t=t, a1=a1, a2=a2, a3=h.h1 * sq, a4=h.h2 / sq,
                      chi1=theta1 / (h.l3 * ta12), chi2=q * theta1 / (h.l4 * ta12),
                      theta1=theta1, theta2=theta1 / h.h3, y=h.h1 * sq, z=1.0, w=w)
    y, z = specialize_yz(base, h.E)
    return base.replace(y=y, z=z)


def qpvi_to_heun(p: QPVIParams) -> QHeunParams:
    """Inverse of :func:`heun_to_qpvi` on the locus y = a3; the sign of C is
    the one the embedding produces."""
    sq, q = cmath.sqrt(p.q), p.q
    ta12 = p.t * p.a1 * p.a2
    h = QHeunParams(q=q, h1=p.a3 / sq, h2=p.a4 * sq, h3=p.theta1 / p.theta2,
                    l1=p.t * p.a1 * sq, l2=p.t * p.a2 * sq,
                    l3=p.theta1 / (p.chi1 * ta12), l4=q * p.theta1 / (p.chi2 * ta12),
                    E=accessory_from_z(p))
    return h.replace(sign=consistent_sign(h, embedded_constant(h)))


def heun_y1_display(p: QPVIParams, E) -> ScalarThreeTerm:
    """The y1 equation on the q-Heun locus, in the displayed q-PVI variables."""
    t, a1, a2, a3, a4 = p.t, p.a1, p.a2, p.a3, p.a4
    chi1, chi2, th1, th2, q = p.chi1, p.chi2, p.theta1, p.theta2, p.q
    ta12 = t * a1 * a2
    return ScalarThreeTerm(
        lambda x: (x - t * a1) * (x - t * a2),
        lambda x: -(ta12 * (chi2 + q * chi1) / (q * th1) * x**2 + E * x + t**2 * a1 * a2 * (1 + th2 / th1)),
        lambda x: chi1 * chi2 * ta12**2 * (x - a3) * (x - q * a4) / (q * th1**2),
        q,
    )


def heun_cy1_display(p: QPVIParams, E) -> ScalarThreeTerm:
    """The transformed equation on the q-Heun locus, in q-PVI variables."""
    t, a1, a2, a3, a4 = p.t, p.a1, p.a2, p.a3, p.a4
    chi1, chi2, th1, th2, q = p.chi1, p.chi2, p.theta1, p.theta2, p.q
    ta12 = t * a1 * a2
    return ScalarThreeTerm(
        lambda x: (x - t * a1) * (x - t * a2),
        lambda x: -((q * chi1 * ta12 + th1) / (q * th1) * x**2 + E * x + t**2 * a1 * a2 * (chi2 * ta12 + th2) / th1),
        lambda x: chi1 * ta12 / (q * th1) * (x - t * th2 / (chi1 * a4)) * (x - q * t * th2 / (chi1 * a3)),
        q,
    )


# ---------------------------------------------------------------------------
# the transformation


def transformed_constant(p: QHeunParams) -> complex:
    """Constant of the transformed equation as the q-PVI route delivers it,
    l1 l2 l3 (q/l4 + 1/h3), written back in q-Heun variables."""
    return p.l1 * p.l2 * p.l3 * (p.q / p.l4 + 1 / p.h3)


def heun_transform_params(p: QHeunParams) -> QHeunParams:
    """(l1, l2, l3, q, q h1/l4, q h2/l4, l4/(q h3), E), sign from the route."""
    new = QHeunParams(q=p.q, h1=p.q * p.h1 / p.l4, h2=p.q * p.h2 / p.l4, h3=p.l4 / (p.q * p.h3),
                      l1=p.l1, l2=p.l2, l3=p.l3, l4=p.q, E=p.E)
    return new.replace(sign=consistent_sign(new, transformed_constant(p)))


def heun_q_lambda(p: QHeunParams) -> complex:
    return p.q / p.l4


def heun_transform(g, p: QHeunParams, x, trunc: Truncation = DEFAULT_TRUNCATION, with_tail: bool = False):
    """int g(s) P(x, s) / (s - x) d_q s with q^lambda = q / l4."""
    from .jackson import scalar_transform

    return scalar_transform(g, None, x, trunc, with_tail=with_tail, q_lambda=heun_q_lambda(p))


def heun_transform_report(g, p: QHeunParams, probes=None, trunc: Truncation = DEFAULT_TRUNCATION):
    from .jackson import probe_points, scalar_report

    probes = probe_points(g.xi, g.q) if probes is None else probes
    eq = build_qheun(heun_transform_params(p))
    return scalar_report(lambda pr: heun_transform(g, p, pr, trunc, with_tail=True), eq, probes, g.half_width)


def random_qheun_params(rng: np.random.Generator) -> QHeunParams:
    """A constrained draw through a random q-PVI tuple on the y = a3 locus."""
    for _ in range(100):
        p = random_qpvi_params(rng)
        p = p.replace(y=p.a3)
        try:
            return qpvi_to_heun(p)
        except SpecializationError:
            continue
    raise InvalidInputError("could not draw q-Heun parameters")


def boundary_free_heun_solution(h: QHeunParams, rng: np.random.Generator, half_width: int, xi=None, tries: int = 12):
    """Tune E so that the lifted B-system has a solution recessive at both
    ends; returns (tuned QHeunParams, BoundaryFreeSolution). The lattice
    function is the first component, a solution of the q-Heun equation."""
    from .jackson import (BoundaryFreeSolution, LatticeFunction, _depth, _safe_xi, glued_solution,
                          js_singular_points, tune_accessory)
    from .qpvi import build_B

    base = heun_to_qpvi(h)
    rho, ratio_inf = base.theta2 / base.theta1, base.chi2 / base.chi1
    mu = base.chi1 / base.c0
    deep = max(_depth(rho), _depth(ratio_inf))
    xi = _safe_xi(rng, base.q, js_singular_points(base), half_width + deep) if xi is None else complex(xi)

    def glue(E):
        sys = build_B(heun_to_qpvi(h.replace(E=E)))
        vals, cas, mismatch = glued_solution(sys.evaluate, xi, base.q, half_width, rho, mu, rho, ratio_inf)
        return cas, mismatch, vals

    E, mismatch = tune_accessory(lambda e: glue(e)[:2], h.E, rng, tries)
    tuned = h.replace(E=E)
    lattice = LatticeFunction(xi, base.q, half_width, glue(E)[2][:, 0])
    return tuned, BoundaryFreeSolution(lattice, E, mismatch, heun_to_qpvi(tuned))
