"""Lattice solutions, truncated Jackson integrals and the integral transforms.

The Jackson integral over [0, xi*inf) is the bilateral sum
(1 - q) sum_n q^n xi f(q^n xi), truncated to n = -N..N. Every transform
here is a finite weighted sum over a :class:`LatticeFunction`; residual
helpers measure how well the result satisfies its target equation at
probe points x = q^k xi sqrt(q), which never meet the lattice or the
kernel poles.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .errors import DivergenceError, InvalidInputError, LatticePoleError, ProbeCollisionError
from .numerics import DEFAULT_TRUNCATION, ZETA, Truncation, p_lambda_array
from .qpvi import (PartialFractionSystem, QPVIParams, ScalarThreeTerm, build_B, complex_json,
                   js_scalar_equation, parse_complex)

#: a point is "on" a singular set when closer than this, relative to its modulus
COLLISION_TOL = 1e-8


@dataclass(frozen=True)
class LatticeFunction:
    """Values on {xi q^n : n = -N..N}; ``values[n + N]`` is a d-vector."""

    xi: complex
    q: complex
    half_width: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.shape[0] != 2 * self.half_width + 1:
            raise InvalidInputError("values must cover n = -N..N")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "xi", complex(self.xi))
        object.__setattr__(self, "q", complex(self.q))

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.half_width, self.half_width + 1)

    @property
    def points(self) -> np.ndarray:
        return self.xi * self.q ** self.indices.astype(float)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def at(self, n: int) -> np.ndarray:
        return self.values[n + self.half_width]

    def component(self, i: int) -> "LatticeFunction":
        return LatticeFunction(self.xi, self.q, self.half_width, self.values[:, i])

    def scaled(self, factor) -> "LatticeFunction":
        return LatticeFunction(self.xi, self.q, self.half_width, factor * self.values)

    def times_power(self, q_power) -> "LatticeFunction":
        """Multiply by s^mu realised as (q^mu)^n (base constant 1)."""
        return self.mapped(lambda n: complex(q_power) ** n)

    def mapped(self, factor_of_n) -> "LatticeFunction":
        f = np.array([factor_of_n(int(n)) for n in self.indices], dtype=np.complex128)
        return LatticeFunction(self.xi, self.q, self.half_width, self.values * f[:, None])

    def truncated(self, n: int) -> "LatticeFunction":
        if n > self.half_width:
            raise InvalidInputError("cannot widen a lattice function")
        lo = self.half_width - n
        return LatticeFunction(self.xi, self.q, n, self.values[lo:lo + 2 * n + 1])

    def __add__(self, other: "LatticeFunction") -> "LatticeFunction":
        if (self.xi, self.q, self.half_width) != (other.xi, other.q, other.half_width):
            raise InvalidInputError("lattice functions live on different lattices")
        return LatticeFunction(self.xi, self.q, self.half_width, self.values + other.values)

    def to_json(self) -> dict:
        return {
            "xi": complex_json(self.xi),
            "q": complex_json(self.q),
            "halfWidth": self.half_width,
            "points": [complex_json(v) for v in self.points],
            "values": [[complex_json(v) for v in row] for row in self.values],
        }

    @classmethod
    def from_json(cls, data: dict) -> "LatticeFunction":
        vals = np.array([[parse_complex(v) for v in row] for row in data["values"]])
        return cls(parse_complex(data["xi"]), parse_complex(data["q"]), int(data["halfWidth"]), vals)


@dataclass(frozen=True)
class ProbePoint:
    """x = base * q^k; powers x^mu are realised as (q^mu)^k."""

    base: complex
    q: complex
    k: int

    @property
    def value(self) -> complex:
        return self.base * self.q ** self.k

    def shift(self, j: int) -> "ProbePoint":
        return ProbePoint(self.base, self.q, self.k + j)

    def power(self, q_power) -> complex:
        return complex(q_power) ** self.k


@dataclass(frozen=True)
class TransformReport:
    residual: float
    truncation_n: int
    tail_mass: float
    values: tuple = field(default=(), compare=False)
    residuals: tuple = field(default=(), compare=False)

    def to_json(self) -> dict:
        return {
            "residual": self.residual,
            "truncationN": self.truncation_n,
            "tailMass": self.tail_mass,
            "residuals": list(self.residuals),
            "values": [[complex_json(v) for v in np.atleast_1d(val)] for val in self.values],
        }


def probe_points(xi, q, count: int = 5) -> list:
    """``count`` probes x = q^k xi sqrt(q), k centred on 0."""
    base = complex(xi) * cmath.sqrt(complex(q))
    lo = -(count // 2)
    return [ProbePoint(base, complex(q), lo + j) for j in range(count)]


def _as_probe(x, xi, q) -> ProbePoint:
    if isinstance(x, ProbePoint):
        return x
    return ProbePoint(complex(x), complex(q), 0)


# ---------------------------------------------------------------------------
# lattice solutions


def _check_lattice(points, singular, what="pole"):
    for idx, s in enumerate(points):
        for b in singular:
            if abs(s - b) <= COLLISION_TOL * max(abs(s), abs(b)):
                raise LatticePoleError(idx - (len(points) - 1) // 2, f"lattice point meets a {what} at {b}")


def lattice_solve(sys, xi, seed, half_width: int, q, avoid=()) -> LatticeFunction:
    """Solution of Y(qx) = B(x) Y(x) on the lattice with Y(xi) = seed.

    ``sys`` needs ``evaluate(x)``; its ``poles`` (if any) and ``avoid``
    are checked against the lattice. Backward steps invert B(q^n xi).
    """
    raise_if = tuple(getattr(sys, "poles", ())) + tuple(avoid)
    return _lattice_solve(sys.evaluate, xi, seed, half_width, raise_if, complex(q))


def _lattice_solve(evaluate, xi, seed, n, singular, q) -> LatticeFunction:
    if n < 1:
        raise InvalidInputError("half_width must be >= 1")
    xi = complex(xi)
    seed = np.asarray(seed, dtype=np.complex128).ravel()
    idx = np.arange(-n, n + 1)
    pts = xi * q ** idx.astype(float)
    _check_lattice(pts, singular)
    fwd = np.array([evaluate(pts[n + k]) for k in range(n)])
    back = []
    for k in range(1, n + 1):
        mat = evaluate(pts[n - k])
        sv = np.linalg.svd(mat, compute_uv=False)
        if sv[-1] <= ZETA * sv[0]:
            raise LatticePoleError(-k, "B is singular at a lattice point")
        back.append(np.linalg.inv(mat))
    up = kernels.chain(fwd, seed)
    down = kernels.chain(np.array(back), seed)
    values = np.vstack([down[::-1], up[1:]])
    return LatticeFunction(xi, q, n, values)


def lattice_solve_scalar(eq: ScalarThreeTerm, xi, seed, half_width: int, avoid=()) -> LatticeFunction:
    """Solution of the three-term equation with u(xi), u(xi/q) = seed."""
    q, xi, n = eq.q, complex(xi), half_width
    if n < 1:
        raise InvalidInputError("half_width must be >= 1")
    idx = np.arange(-n, n + 1)
    pts = xi * q ** idx.astype(float)
    _check_lattice(pts, avoid)
    u0, um1 = (complex(v) for v in seed)

    def coeffs(k):
        cp, cz, cm = eq.coefficients(pts[n + k])
        scale = abs(cp) + abs(cz) + abs(cm)
        return cp, cz, cm, scale

    fwd = []
    for k in range(n):  # (u_k, u_{k-1}) -> (u_{k+1}, u_k)
        cp, cz, cm, scale = coeffs(k)
        if abs(cp) <= ZETA * scale:
            raise LatticePoleError(k, "leading coefficient vanishes at a lattice point")
        fwd.append([[-cz / cp, -cm / cp], [1, 0]])
    back = []
    for k in range(-1, -n, -1):  # (u_k, u_{k+1}) -> (u_{k-1}, u_k)
        cp, cz, cm, scale = coeffs(k)
        if abs(cm) <= ZETA * scale:
            raise LatticePoleError(k, "trailing coefficient vanishes at a lattice point")
        back.append([[-cz / cm, -cp / cm], [1, 0]])
    up = kernels.chain(np.array(fwd, dtype=np.complex128), np.array([u0, um1]))[:, 0]
    if back:
        down = kernels.chain(np.array(back, dtype=np.complex128), np.array([um1, u0]))[:, 0]
    else:
        down = np.array([um1])
    values = np.concatenate([down[::-1], up])
    return LatticeFunction(xi, q, n, values)


# ---------------------------------------------------------------------------
# Jackson sums


def jackson_weights(f: LatticeFunction) -> np.ndarray:
    return (1 - f.q) * f.points


def jackson_integral(f: LatticeFunction):
    """(value, tail_mass): the truncated bilateral sum and the larger end term."""
    terms = jackson_weights(f)[:, None] * f.values
    value = terms.sum(axis=0)
    tail = max(np.linalg.norm(terms[0]), np.linalg.norm(terms[-1]))
    return (value[0] if f.dim == 1 else value), float(tail)


def _kernel(f: LatticeFunction, x, q_lambda, trunc: Truncation) -> np.ndarray:
    return p_lambda_array(x, f.points, q_lambda, f.q, trunc)


def _check_probe(f: LatticeFunction, x, extra=()):
    pts = f.points
    d = np.abs(pts - x)
    bad = np.nonzero(d <= COLLISION_TOL * np.maximum(np.abs(pts), abs(x)))[0]
    if bad.size:
        raise ProbeCollisionError(int(f.indices[bad[0]]), f"probe {x} lies on the lattice")
    for e in extra:
        if abs(x - e) <= COLLISION_TOL * max(abs(x), abs(e)):
            raise ProbeCollisionError(0, f"probe {x} meets a singular point {e}")


def weighted_sum(f: LatticeFunction, integrand: np.ndarray):
    """sum_n w_n integrand_n f_n; returns (value, tail_mass)."""
    terms = (jackson_weights(f) * integrand)[:, None] * f.values
    value = terms.sum(axis=0)
    tail = max(np.linalg.norm(terms[0]), np.linalg.norm(terms[-1]))
    return value, float(tail)


# ---------------------------------------------------------------------------
# transforms


def convolution_transform(sys: PartialFractionSystem, y: LatticeFunction, q_lambda, x,
                          trunc: Truncation = DEFAULT_TRUNCATION, with_tail: bool = False):
    """Stacked Y-hat_i(x) = int P(x, s) Y(s) / (s - b_i) d_q s, b_0 = 0."""
    xv = _as_probe(x, y.xi, y.q).value
    _check_probe(y, xv)
    ker = _kernel(y, xv, q_lambda, trunc)
    s = y.points
    parts, tail = [], 0.0
    for b in (0.0,) + tuple(sys.poles):
        val, t = weighted_sum(y, ker / (s - b))
        parts.append(val)
        tail = max(tail, t)
    out = np.concatenate(parts)
    return (out, tail) if with_tail else out


def mc_prefactor_y1(p: QPVIParams) -> complex:
    ta12 = p.t * p.a1 * p.a2
    return p.t * (p.chi2 * ta12 - p.theta1) / (p.q * p.w * p.y * p.z * p.chi2 * (p.chi1 * ta12 - p.theta1))


def scalar_transform(y1: LatticeFunction, p: QPVIParams, x, trunc: Truncation = DEFAULT_TRUNCATION,
                     with_tail: bool = False, q_lambda=None):
    """int y1(s) P(x, s) / (s - x) d_q s with q^lambda = chi2 t a1 a2 / theta1."""
    ql = p.chi2 * p.t * p.a1 * p.a2 / p.theta1 if q_lambda is None else q_lambda
    xv = _as_probe(x, y1.xi, y1.q).value
    _check_probe(y1, xv)
    ker = _kernel(y1, xv, ql, trunc)
    val, tail = weighted_sum(y1.component(0), ker / (y1.points - xv))
    return (complex(val[0]), tail) if with_tail else complex(val[0])


def mc_transform_y1(y1: LatticeFunction, p: QPVIParams, x, trunc: Truncation = DEFAULT_TRUNCATION,
                    with_tail: bool = False):
    """First component of the middle-convolved solution (chi2 branch)."""
    val, tail = scalar_transform(y1, p, x, trunc, with_tail=True)
    pref = mc_prefactor_y1(p)
    return (pref * val, abs(pref) * tail) if with_tail else pref * val


def mc_transform_y2(y1: LatticeFunction, p: QPVIParams, x, trunc: Truncation = DEFAULT_TRUNCATION,
                    with_tail: bool = False):
    """Second component (chi2 branch); built from y1 only."""
    q, t, y, z, w = p.q, p.t, p.y, p.z, p.w
    ta12 = t * p.a1 * p.a2
    th1 = p.theta1
    ql = p.chi2 * ta12 / th1
    xv = _as_probe(x, y1.xi, y1.q).value
    _check_probe(y1, xv, (y, q * y))
    s = y1.points
    _check_lattice(s, (y, q * y), "pole of the y2 integrand")
    ker = _kernel(y1, xv, ql, trunc)
    shape = (q * z * th1 / (s - q * y) - ta12 / (s - y)
             + ((q * z * th1 - ta12) / (p.chi1 * ta12 - th1) - q**2 * y * z / (s - q * y))
             * (p.chi2 * ta12 - th1) / (xv - s))
    val, tail = weighted_sum(y1.component(0), shape * ker)
    pref = 1 / (q * w * y * z * p.chi2 * p.a1 * p.a2)
    return (complex(pref * val[0]), abs(pref) * tail) if with_tail else complex(pref * val[0])


def mc_transform_rows(y: LatticeFunction, p: QPVIParams, x, branch: str = "chi2",
                      trunc: Truncation = DEFAULT_TRUNCATION, with_tail: bool = False):
    """First two components of P^{-1} Y-hat(x), rows combined inside the sum.

    Combining the integrands before summing keeps the sum convergent even
    where the individual Y-hat_i diverge.
    """
    from .engine import branch_q_lambda, closed_form_P

    pinv = np.linalg.inv(closed_form_P(p, branch))[:2]
    ql = branch_q_lambda(p, branch)
    xv = _as_probe(x, y.xi, y.q).value
    _check_probe(y, xv)
    s = y.points
    ker = _kernel(y, xv, ql, trunc)
    stacked = np.hstack([y.values / (s - b)[:, None] for b in (0.0, p.t * p.a1, p.t * p.a2)])
    integrand = stacked @ pinv.T  # (2N+1, 2)
    terms = (jackson_weights(y) * ker)[:, None] * integrand
    val = terms.sum(axis=0)
    tail = float(max(np.linalg.norm(terms[0]), np.linalg.norm(terms[-1])))
    return (val, tail) if with_tail else val


def mc_transform(y: LatticeFunction, p: QPVIParams, x, trunc: Truncation = DEFAULT_TRUNCATION,
                 with_tail: bool = False):
    """(y1-check, y2-check) from the closed-form integral representations."""
    a, ta = mc_transform_y1(y, p, x, trunc, with_tail=True)
    b, tb = mc_transform_y2(y, p, x, trunc, with_tail=True)
    out = np.array([a, b])
    return (out, max(ta, tb)) if with_tail else out


# ---------------------------------------------------------------------------
# residuals


def vector_residual(y_qx, y_x, mat) -> float:
    y_x = np.asarray(y_x)
    return float(np.linalg.norm(np.asarray(y_qx) - mat @ y_x) / np.linalg.norm(y_x))


def _relative_tail(tail, value) -> float:
    norm = np.linalg.norm(np.atleast_1d(value))
    return float(tail / norm) if norm else float(tail)


def system_report(transform, system_matrix, probes, half_width: int) -> TransformReport:
    """Residual of Yc(qx) = M(x) Yc(x) for ``transform(probe) -> (value, tail)``."""
    residuals, values, tails = [], [], []
    for pr in probes:
        v, t = transform(pr)
        vq, tq = transform(pr.shift(1))
        residuals.append(vector_residual(vq, v, system_matrix(pr.value)))
        values.append(v)
        tails.append(max(_relative_tail(t, v), _relative_tail(tq, vq)))
    return TransformReport(max(residuals), half_width, max(tails), tuple(values), tuple(residuals))


def scalar_report(transform, eq: ScalarThreeTerm, probes, half_width: int) -> TransformReport:
    """Residual of a three-term equation for ``transform(probe) -> (value, tail)``."""
    residuals, values, tails = [], [], []
    for pr in probes:
        (u0, t0), (up, tp), (um, tm) = (transform(pr.shift(j)) for j in (0, 1, -1))
        residuals.append(eq.relative_residual(up, u0, um, pr.value))
        values.append(u0)
        tails.append(max(_relative_tail(t0, u0), _relative_tail(tp, up), _relative_tail(tm, um)))
    return TransformReport(max(residuals), half_width, max(tails), tuple(values), tuple(residuals))


def lattice_scalar_residual(u: LatticeFunction, eq: ScalarThreeTerm) -> float:
    """Max relative residual of a lattice function against a three-term equation."""
    vals = u.values[:, 0]
    pts = u.points
    return max(eq.relative_residual(vals[i + 1], vals[i], vals[i - 1], pts[i]) for i in range(1, len(vals) - 1))


def convolution_report(sys: PartialFractionSystem, y: LatticeFunction, q_lambda, probes=None,
                       trunc: Truncation = DEFAULT_TRUNCATION) -> TransformReport:
    from .engine import q_convolution

    probes = probe_points(y.xi, y.q) if probes is None else probes
    tup = q_convolution(sys, q_lambda)
    f_sys = tup.as_system()
    return system_report(lambda pr: convolution_transform(sys, y, q_lambda, pr, trunc, with_tail=True),
                         f_sys.evaluate, probes, y.half_width)


def mc_vector_report(y1: LatticeFunction, p: QPVIParams, probes=None,
                     trunc: Truncation = DEFAULT_TRUNCATION) -> TransformReport:
    from .engine import closed_form_mc

    probes = probe_points(y1.xi, y1.q) if probes is None else probes
    fbar = closed_form_mc(p, "chi2")
    return system_report(lambda pr: mc_transform(y1, p, pr, trunc, with_tail=True),
                         fbar.evaluate, probes, y1.half_width)


def rows_vector_report(y: LatticeFunction, p: QPVIParams, branch: str = "chi2", probes=None,
                       trunc: Truncation = DEFAULT_TRUNCATION) -> TransformReport:
    from .engine import closed_form_mc

    probes = probe_points(y.xi, y.q) if probes is None else probes
    fbar = closed_form_mc(p, branch)
    return system_report(lambda pr: mc_transform_rows(y, p, pr, branch, trunc, with_tail=True),
                         fbar.evaluate, probes, y.half_width)


def transformed_scalar_equation(p: QPVIParams) -> ScalarThreeTerm:
    """Target of the scalar transform, as displayed: the y1-check equation
    with (y~, z~) from the c~ = chi2 parameter map."""
    from .engine import parameter_map_mc

    new = parameter_map_mc(p, p.chi2, "chi2")
    q, t, yt, zt = p.q, p.t, new.y, new.z
    chi1, chi2, a1, a2, a3, a4 = p.chi1, p.chi2, p.a1, p.a2, p.a3, p.a4
    th1, th2 = p.theta1, p.theta2
    ta12 = t * a1 * a2

    def regular(x):
        return (x * (q * t * th2 * zt - a3 * a4) * (chi2 * zt - 1) / (a3 * a4 * zt)
                - t**2 * a1 * a2 * (q * chi2 * th2 * zt - th1) * (q * chi2**2 * ta12 * zt - th1) / (th1**2 * yt * zt))

    def t_minus(x):
        return (chi2 * t * th2 * (x - q * t * th2 / (chi1 * a4)) * (x - q * t * th2 / (chi1 * a3))
                / (a3 * a4 * (q * yt - x)))

    def t_plus(x):
        return q * (x - t * a1) * (x - t * a2) / (yt - x)

    return ScalarThreeTerm(
        lambda x: -chi2 * t_plus(x),
        lambda x: regular(x) + q * zt * t_minus(x) + t_plus(x) / (q * zt),
        lambda x: -t_minus(x) / chi2,
        q,
        regular,
    )


def mapped_scalar_equation(p: QPVIParams) -> ScalarThreeTerm:
    """The same target rebuilt from the generic elimination applied to the
    mapped tuple (gauge d0 = chi2); an independent route to the display."""
    from .engine import parameter_map_mc

    return js_scalar_equation(parameter_map_mc(p, p.chi2, "chi2"), p.chi2)


def scalar_transform_report(y1: LatticeFunction, p: QPVIParams, probes=None,
                            trunc: Truncation = DEFAULT_TRUNCATION) -> TransformReport:
    probes = probe_points(y1.xi, y1.q) if probes is None else probes
    eq = transformed_scalar_equation(p)
    return scalar_report(lambda pr: scalar_transform(y1, p, pr, trunc, with_tail=True),
                         eq, probes, y1.half_width)


def kny_exponents(kny) -> tuple:
    """(q^mu, q^mu', q^lambda) = (nu5/kappa2, q nu2, q nu2 nu5/kappa2)."""
    q_mu = kny.nu5 / kny.kappa2
    q_mu_p = kny.q * kny.nu2
    return q_mu, q_mu_p, q_mu_p * q_mu


def kny_transform(y: LatticeFunction, kny, x, trunc: Truncation = DEFAULT_TRUNCATION,
                  with_tail: bool = False):
    """x^mu' int y(s) s^mu P(x, s) / (s - x) d_q s for a solution of L1 y = 0.

    s^mu is (q^mu)^n on the lattice and x^mu' is (q^mu')^k at the probe
    x = base q^k; both base constants are fixed to 1.
    """
    q_mu, q_mu_p, ql = kny_exponents(kny)
    pr = _as_probe(x, y.xi, y.q)
    val, tail = scalar_transform(y.times_power(q_mu), None, pr, trunc, with_tail=True, q_lambda=ql)
    pref = pr.power(q_mu_p)
    return (pref * val, abs(pref) * tail) if with_tail else pref * val


def kny_transform_report(y: LatticeFunction, kny, probes=None,
                         trunc: Truncation = DEFAULT_TRUNCATION) -> TransformReport:
    """Residual of L1~ y-check = 0, L1~ carrying the image of the convolution word."""
    from .weyl import PROP41_WORD, apply_word, l1_operator

    probes = probe_points(y.xi, y.q) if probes is None else probes
    eq = l1_operator(apply_word(PROP41_WORD, kny))
    return scalar_report(lambda pr: kny_transform(y, kny, pr, trunc, with_tail=True), eq, probes, y.half_width)


def kny_solution(y1: LatticeFunction, kny) -> LatticeFunction:
    """y = s^-mu y1: a solution of L1 y = 0 from a B-system first component."""
    return y1.component(0).times_power(1 / kny_exponents(kny)[0])


# ---------------------------------------------------------------------------
# parameter draws for the convergent regime


def _polar(rng, lo, hi):
    return rng.uniform(lo, hi) * cmath.exp(2j * cmath.pi * rng.uniform())


def convergent_qpvi_params(rng: np.random.Generator, q_range=(0.2, 0.7), rate=(0.64, 0.70),
                           q_lambda_modulus=(0.3, 0.9), max_tries: int = 200) -> QPVIParams:
    """Draw a tuple whose chi2-branch transforms converge geometrically.

    For a boundary-free solution (see :func:`boundary_free_js_solution`) the
    Jackson sums decay like |chi2 / chi1|^N towards infinity and
    |theta2 / theta1|^N towards zero. The first ratio is drawn in ``rate``,
    the second in [0.2, that ratio], and |q^lambda| in ``q_lambda_modulus``.
    """
    for _ in range(max_tries):
        q = _polar(rng, *q_range)
        t, a1, a2, a4 = (_polar(rng, 0.5, 2.0) for _ in range(4))
        chi1 = _polar(rng, 0.7, 1.4)
        r = rng.uniform(*rate)
        chi2 = chi1 * r * cmath.exp(2j * cmath.pi * rng.uniform())
        ql = _polar(rng, *q_lambda_modulus)
        theta1 = chi2 * t * a1 * a2 / ql
        rho = rng.uniform(0.2, r)
        theta2 = theta1 * rho * cmath.exp(2j * cmath.pi * rng.uniform())
        a3 = theta1 * theta2 / (chi1 * chi2 * a1 * a2 * a4)
        y, z = _polar(rng, 0.5, 2.0), _polar(rng, 0.5, 2.0)
        p = QPVIParams(q=q, t=t, a1=a1, a2=a2, a3=a3, a4=a4, chi1=chi1, chi2=chi2,
                       theta1=theta1, theta2=theta2, y=y, z=z, w=1.0)
        try:
            p.check()
        except InvalidInputError:
            continue
        if not (0.05 < abs(a3) < 20):
            continue
        return p
    raise InvalidInputError("could not draw a convergent tuple")


def js_singular_points(p: QPVIParams):
    """Points the lattice must avoid for the JS solution and its transforms."""
    return (p.t * p.a1, p.t * p.a2, p.a3, p.a4, p.y, p.q * p.y)


def _safe_xi(rng, q, singular, n, tries=100):
    for _ in range(tries):
        xi = _polar(rng, 0.7, 1.4)
        pts = xi * complex(q) ** np.arange(-n - 3, n + 4).astype(float)
        ok = all(np.min(np.abs(pts - b) / np.maximum(np.abs(pts), abs(b))) > 1e-3 for b in singular)
        if ok:
            return xi
    raise InvalidInputError("could not place the lattice away from singular points")


def js_lattice_solution(p: QPVIParams, rng: np.random.Generator, half_width: int, xi=None) -> LatticeFunction:
    """Lattice solution of the B-system (c0 = theta1 / (t a1 a2)) with a random seed."""
    xi = _safe_xi(rng, p.q, js_singular_points(p), 2 * half_width) if xi is None else xi
    seed = rng.normal(size=2) + 1j * rng.normal(size=2)
    return lattice_solve(build_B(p), xi, seed, half_width, p.q, avoid=js_singular_points(p))


@dataclass(frozen=True)
class BoundaryFreeSolution:
    """A lattice solution decaying at both ends of the Jackson contour.

    ``accessory`` is the tuned value of the free coefficient (z for the JS
    system, E for q-Heun); ``mismatch`` is the relative defect of the glue
    between the two recessive halves.
    """

    lattice: LatticeFunction
    accessory: complex
    mismatch: float
    params: object = None


def _depth(ratio, floor=1e-18) -> int:
    ratio = abs(ratio)
    if not 0 < ratio < 1:
        raise InvalidInputError(f"mode ratio {ratio:.3g} gives no recessive solution")
    return int(np.ceil(np.log(floor) / np.log(ratio))) + 5


def _recessive_halves(evaluate, xi, q, n, rate_zero, rate_inf, deep_zero, deep_inf):
    """Two half-lattices of scaled iterates: ``a`` recessive at 0 (backward
    steps from n + deep_zero), ``b`` recessive at infinity (forward steps
    from -n - deep_inf). Entry k holds the solution at q^k xi divided by
    rate^k, with the scaling constant fixed, so both depend analytically on
    the coefficients."""
    q = complex(q)
    dim = np.asarray(evaluate(xi)).shape[0]
    start = np.zeros(dim, dtype=np.complex128)
    start[0] = 1.0
    a = np.empty((n + 1, dim), dtype=np.complex128)
    vec = start.copy()
    for k in range(n + deep_zero - 1, -1, -1):
        vec = np.linalg.solve(evaluate(xi * q**k), vec) * rate_zero
        if k <= n:
            a[k] = vec
    b = np.empty((n + 1, dim), dtype=np.complex128)
    vec = start.copy()
    for k in range(-n - deep_inf, 0):
        if k >= -n:
            b[k + n] = vec
        vec = (evaluate(xi * q**k) @ vec) / rate_inf
    b[n] = vec
    return a, b


def glued_solution(evaluate, xi, q, half_width: int, rate_zero, rate_inf, ratio_zero, ratio_inf):
    """Solution of Y(qx) = M(x) Y(x) recessive at both ends, when it exists.

    ``rate_zero`` is the eigenvalue of M(0) carried by the recessive mode and
    ``rate_inf`` the dominant forward growth at infinity; ``ratio_*`` are the
    moduli of the mode ratios fixing the start depths. Returns
    ``(values, casoratian, mismatch)``; the glue is only a solution when the
    2x2 casoratian of the halves at xi vanishes.
    """
    n = half_width
    a, b = _recessive_halves(evaluate, xi, q, n, rate_zero, rate_inf, _depth(ratio_zero), _depth(ratio_inf))
    a0, b0 = a[0], b[n]
    cas = a0[0] * b0[1] - a0[1] * b0[0]
    c = np.vdot(b0, a0) / np.vdot(b0, b0)
    mismatch = float(np.linalg.norm(a0 - c * b0) / np.linalg.norm(a0))
    k = np.arange(-n, n + 1)
    vals = np.empty((2 * n + 1, a.shape[1]), dtype=np.complex128)
    vals[n:] = a * (rate_zero ** k[n:].astype(float))[:, None]
    vals[:n] = c * b[:n] * (rate_inf ** k[:n].astype(float))[:, None]
    return vals, cas, mismatch


def tune_accessory(casoratian, start, rng, tries: int = 12, tol: float = 1e-12, accept: float = 1e-8):
    """Zero of an analytic casoratian in the accessory parameter.

    Complex secant iterations from ``start`` and then from random restarts
    around it; returns the first root whose glue mismatch is below ``tol``,
    else the best root if its mismatch is below ``accept``.
    """
    from scipy.optimize import newton

    best = None
    for attempt in range(tries):
        x0 = complex(start) if attempt == 0 else complex(start) * _polar(rng, 0.3, 3.0)
        try:
            root = complex(newton(lambda v: casoratian(v)[0], x0, x1=x0 * (1 + 1e-3), tol=1e-15,
                                  maxiter=200))
        except (RuntimeError, ArithmeticError, InvalidInputError, np.linalg.LinAlgError):
            continue
        if not np.isfinite(root):
            continue
        mismatch = casoratian(root)[1]
        if best is None or mismatch < best[1]:
            best = (root, mismatch)
        if mismatch < tol:
            return best
    if best is None or best[1] > accept:
        found = "no root" if best is None else f"only a glue mismatch of {best[1]:.2e}"
        raise DivergenceError(f"secant iteration for the accessory parameter found {found}")
    return best


def boundary_free_js_solution(p: QPVIParams, rng: np.random.Generator, half_width: int, xi=None,
                              tries: int = 12) -> BoundaryFreeSolution:
    """Tune z so that the B-system has a solution recessive at both ends.

    A generic lattice solution keeps the eigenvalue-1 mode of B(0) at zero
    and the chi2 mode at infinity; both leave index-shift boundary terms in
    the Jackson sums that the kernel K + L does not absorb. Tuning the
    accessory z kills the connection coefficient between the two recessive
    solutions, after which the transforms hold up to the truncation tail.
    """
    n = half_width
    rho, ratio_inf = p.theta2 / p.theta1, p.chi2 / p.chi1
    mu = p.chi1 / p.c0
    deep = max(_depth(rho), _depth(ratio_inf))
    xi = _safe_xi(rng, p.q, js_singular_points(p), n + deep) if xi is None else complex(xi)

    def glue(z):
        sys = build_B(p.replace(z=z))
        vals, cas, mismatch = glued_solution(sys.evaluate, xi, p.q, n, rho, mu, rho, ratio_inf)
        return cas, mismatch, vals

    z, mismatch = tune_accessory(lambda z: glue(z)[:2], p.z, rng, tries)
    vals = glue(z)[2]
    tuned = p.replace(z=z)
    return BoundaryFreeSolution(LatticeFunction(xi, p.q, n, vals), z, mismatch, tuned)


def convergent_system(rng: np.random.Generator, m: int = 2, n_poles: int = 2, q_range=(0.2, 0.7),
                      rate=(0.70, 0.76)):
    """A random partial-fraction system and q^lambda for which every stacked
    Y-hat_i converges: rho(B(0)) and |q^lambda| in ``rate``, with every
    eigenvalue of B_inf of modulus at least 1."""
    q = _polar(rng, *q_range)
    b_inf = np.diag([_polar(rng, 1.0, 1.5) for _ in range(m)])
    r0 = rng.uniform(*rate)
    mu = [r0 * cmath.exp(2j * cmath.pi * rng.uniform()) for _ in range(m)]
    mu[1:] = [v * rng.uniform(0.3, 1.0) for v in mu[1:]]
    v = np.eye(m) + 0.3 * (rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m)))
    b_at_0 = v @ np.diag(mu) @ np.linalg.inv(v)
    residues = [0.5 * (rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))) for _ in range(n_poles - 1)]
    residues.append(b_at_0 - b_inf - sum(residues))
    poles = tuple(_polar(rng, 0.5, 2.0) for _ in range(n_poles))
    # |q^lambda| < 1 <= min|eig B_inf|, so the ratio stays inside ``rate`` too
    ql = rng.uniform(*rate) * cmath.exp(2j * cmath.pi * rng.uniform())
    return PartialFractionSystem(b_inf, poles, tuple(residues)), ql, q
