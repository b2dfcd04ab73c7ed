"""The Jimbo-Sakai linear problem of q-Painleve VI.

Parameter tuples, the quadratic matrix polynomial A(x), the partial
fraction system B(x) = A(x) / (c0 (x - t a1)(x - t a2)), its kernel
vectors, and elimination to a scalar three-term q-difference equation.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    CoincidentPoleError,
    ConstraintError,
    DegenerateParameterError,
    RankError,
    ReducibleSystemError,
)
from .numerics import ZETA, safe_div

QPVI_FIELDS = ("q", "t", "a1", "a2", "a3", "a4", "chi1", "chi2", "theta1", "theta2", "y", "z", "w")


def rel_diff(a, b) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


@dataclass(frozen=True)
class QPVIParams:
    """Jimbo-Sakai parameters with chi1 chi2 a1 a2 a3 a4 = theta1 theta2."""

    q: complex
    t: complex
    a1: complex
    a2: complex
    a3: complex
    a4: complex
    chi1: complex
    chi2: complex
    theta1: complex
    theta2: complex
    y: complex
    z: complex
    w: complex = 1.0

    def __post_init__(self):
        for name in QPVI_FIELDS:
            object.__setattr__(self, name, complex(getattr(self, name)))

    def constraint_residual(self) -> float:
        lhs = self.chi1 * self.chi2 * self.a1 * self.a2 * self.a3 * self.a4
        rhs = self.theta1 * self.theta2
        return abs(lhs - rhs) / abs(rhs)

    def check(self, tol: float = 1e3 * ZETA) -> "QPVIParams":
        """Validate the constraint and nondegeneracy; returns ``self``."""
        for name in QPVI_FIELDS:
            if getattr(self, name) == 0:
                raise DegenerateParameterError(f"parameter {name} must be nonzero")
        if self.theta1 * self.theta2 == 0 or self.constraint_residual() > tol:
            raise ConstraintError("chi1*chi2*a1*a2*a3*a4 = theta1*theta2", self.constraint_residual())
        if rel_diff(self.a1, self.a2) <= 10 * ZETA:
            raise DegenerateParameterError("a1 and a2 must differ")
        if rel_diff(self.chi1, self.chi2) <= 10 * ZETA:
            raise DegenerateParameterError("chi1 and chi2 must differ")
        return self

    def replace(self, **changes) -> "QPVIParams":
        return dataclasses.replace(self, **changes)

    def swap_a12(self) -> "QPVIParams":
        return self.replace(a1=self.a2, a2=self.a1)

    def swap_theta(self) -> "QPVIParams":
        """The theta1 <-> theta2 swap relating the two c0 branches."""
        return self.replace(theta1=self.theta2, theta2=self.theta1)

    @property
    def c0(self) -> complex:
        """The normalisation making det B0 = 0: theta1 / (t a1 a2)."""
        return self.theta1 / (self.t * self.a1 * self.a2)

    @property
    def b_params(self) -> tuple:
        """(b1, b2, b3, b4) of the q-PVI flow; a derived read-only view."""
        return (
            self.a1 * self.a2 / self.theta1,
            self.a1 * self.a2 / self.theta2,
            1 / (self.q * self.chi1),
            1 / self.chi2,
        )

    def to_json(self) -> dict:
        return {name: [getattr(self, name).real, getattr(self, name).imag] for name in QPVI_FIELDS}

    @classmethod
    def from_json(cls, data: dict) -> "QPVIParams":
        kwargs = {}
        for name in QPVI_FIELDS:
            if name not in data:
                if name == "w":
                    continue
                raise KeyError(f"missing field {name!r}")
            kwargs[name] = parse_complex(data[name])
        return cls(**kwargs)


def parse_complex(value) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f"complex numbers are [re, im] pairs, got {value!r}")
        return complex(float(value[0]), float(value[1]))
    return complex(value)


def complex_json(value) -> list:
    value = complex(value)
    return [value.real, value.imag]


def matrix_json(mat) -> list:
    return [[complex_json(v) for v in row] for row in np.asarray(mat)]


def matrix_from_json(rows) -> np.ndarray:
    return np.array([[parse_complex(v) for v in row] for row in rows], dtype=np.complex128)


def _polar(rng, lo, hi):
    return rng.uniform(lo, hi) * np.exp(2j * np.pi * rng.uniform())


def random_qpvi_params(rng: np.random.Generator, q_range=(0.2, 0.7), modulus=(0.5, 2.0)) -> QPVIParams:
    """Random constrained tuple: polar draws, theta2 solved from the constraint.

    Draws that are degenerate within 10*ZETA are rejected and redrawn.
    """
    while True:
        q = _polar(rng, *q_range)
        vals = {k: _polar(rng, *modulus) for k in ("t", "a1", "a2", "a3", "a4", "chi1", "chi2", "theta1", "y", "z", "w")}
        vals["theta2"] = vals["chi1"] * vals["chi2"] * vals["a1"] * vals["a2"] * vals["a3"] * vals["a4"] / vals["theta1"]
        p = QPVIParams(q=q, **vals)
        t, a1, a2 = p.t, p.a1, p.a2
        separations = [
            (p.a1, p.a2), (p.chi1, p.chi2), (p.chi1 * t * a1 * a2, p.theta1),
            (p.chi2 * t * a1 * a2, p.theta1), (p.y, t * a1), (p.y, t * a2),
            (p.y, p.a3), (p.y, p.a4), (p.q * p.z * p.chi1, 1.0),
        ]
        if all(rel_diff(u, v) > 10 * ZETA for u, v in separations):
            return p


@dataclass(frozen=True)
class MatrixPolynomial:
    coefficients: tuple  # A0, A1, A2, ...

    def evaluate(self, x) -> np.ndarray:
        out = np.zeros_like(self.coefficients[0])
        for c in reversed(self.coefficients):
            out = out * x + c
        return out

    def det(self, x) -> complex:
        return complex(np.linalg.det(self.evaluate(x)))

    @property
    def size(self) -> int:
        return self.coefficients[0].shape[0]


@dataclass(frozen=True)
class PartialFractionSystem:
    """Y(qx) = (B_inf + sum_i B_i / (1 - x/b_i)) Y(x)."""

    b_inf: np.ndarray
    poles: tuple
    residues: tuple

    def __post_init__(self):
        poles = tuple(complex(b) for b in self.poles)
        object.__setattr__(self, "poles", poles)
        object.__setattr__(self, "b_inf", np.asarray(self.b_inf, dtype=np.complex128))
        object.__setattr__(self, "residues", tuple(np.asarray(r, dtype=np.complex128) for r in self.residues))
        if len(poles) != len(self.residues):
            raise ValueError("one residue matrix per pole")
        for i, b in enumerate(poles):
            if b == 0:
                raise DegenerateParameterError("poles must be nonzero")
            for c in poles[:i]:
                if rel_diff(b, c) <= 10 * ZETA:
                    raise CoincidentPoleError(f"coincident poles {c} and {b}")

    @property
    def size(self) -> int:
        return self.b_inf.shape[0]

    @property
    def b0(self) -> np.ndarray:
        return np.eye(self.size) - self.b_inf - sum(self.residues)

    def evaluate(self, x) -> np.ndarray:
        out = self.b_inf.copy()
        for b, r in zip(self.poles, self.residues):
            out = out + r / (1 - x / b)
        return out

    def to_json(self) -> dict:
        return {
            "bInfinity": matrix_json(self.b_inf),
            "residues": [{"pole": complex_json(b), "matrix": matrix_json(r)} for b, r in zip(self.poles, self.residues)],
        }

    @classmethod
    def from_json(cls, data: dict) -> "PartialFractionSystem":
        return cls(
            matrix_from_json(data["bInfinity"]),
            tuple(parse_complex(r["pole"]) for r in data["residues"]),
            tuple(matrix_from_json(r["matrix"]) for r in data["residues"]),
        )


def _accessory(p: QPVIParams):
    q, t, y, z = p.q, p.t, p.y, p.z
    chi1, chi2, a1, a2, a3, a4 = p.chi1, p.chi2, p.a1, p.a2, p.a3, p.a4
    z1 = (y - t * a1) * (y - t * a2) / (q * chi1 * z)
    z2 = q * chi1 * (y - a3) * (y - a4) * z
    d = safe_div(1.0, chi1 - chi2, scale=abs(chi1) + abs(chi2), what="chi1 - chi2")
    inv_y = safe_div(1.0, y, scale=1.0, what="y")
    u = inv_y * ((p.theta1 + p.theta2) * t - chi1 * z1 - chi2 * z2)
    v = (a1 + a2) * t + a3 + a4 - 2 * y
    alpha = d * (u - chi2 * v)
    beta = d * (-u + chi1 * v)
    gamma = z1 + z2 + (y + alpha) * (y + beta) + (alpha + beta) * y - a1 * a2 * t**2 - (a1 + a2) * (a3 + a4) * t - a3 * a4
    delta = inv_y * (a1 * a2 * a3 * a4 * t**2 - (alpha * y + z1) * (beta * y + z2))
    return alpha, beta, gamma, delta, z1, z2


def build_A(p: QPVIParams) -> MatrixPolynomial:
    """A(x) = A0 + A1 x + A2 x^2 pinned by (y, z, w)."""
    alpha, beta, gamma, delta, z1, z2 = _accessory(p)
    chi1, chi2, y, w = p.chi1, p.chi2, p.y, p.w
    a2 = np.diag([chi1, chi2]).astype(np.complex128)
    a1 = np.array([[-chi1 * (y + alpha), chi2 * w], [chi1 * gamma / w, -chi2 * (y + beta)]])
    a0 = np.array([[chi1 * (y * alpha + z1), -chi2 * w * y], [chi1 * delta / w, chi2 * (y * beta + z2)]])
    return MatrixPolynomial((a0, a1, a2))


def build_B(p: QPVIParams, c0=None) -> PartialFractionSystem:
    """Partial fractions of A(x) / (c0 (x - t a1)(x - t a2)).

    ``c0`` defaults to theta1 / (t a1 a2), the value making det B0 = 0.
    """
    if c0 is None:
        c0 = p.c0
    if c0 == 0:
        raise DegenerateParameterError("c0 must be nonzero")
    b1, b2 = p.t * p.a1, p.t * p.a2
    if rel_diff(b1, b2) <= 10 * ZETA:
        raise CoincidentPoleError("t a1 and t a2 coincide")
    amat = build_A(p)
    res1 = amat.evaluate(b1) / (c0 * b1 * (b2 - b1))
    res2 = amat.evaluate(b2) / (c0 * b2 * (b1 - b2))
    return PartialFractionSystem(amat.coefficients[2] / c0, (b1, b2), (res1, res2))


def _null_vector_2x2(mat: np.ndarray, first: complex, rank_tol: float) -> np.ndarray:
    norm = np.linalg.norm(mat)
    if abs(np.linalg.det(mat)) > rank_tol * norm**2:
        raise RankError(f"matrix has full rank (|det|/|M|^2 = {abs(np.linalg.det(mat)) / norm**2:.3e})")
    row = 0 if abs(mat[0, 1]) >= abs(mat[1, 1]) else 1
    if abs(mat[row, 1]) <= ZETA * norm:
        raise RankError("kernel is spanned by (0, 1); the first component cannot be normalised")
    return np.array([first, -mat[row, 0] * first / mat[row, 1]])


def kernel_vectors(p: QPVIParams, c0=None, rank_tol: float = 1e-9):
    """Kernel vectors of B0, B1, B2 with the first components normalised as

    v01 = q w y z theta1 (chi1 - chi2),  v11 = v21 = chi2 * v01.
    """
    sys = build_B(p, c0)
    base = p.q * p.w * p.y * p.z * p.theta1 * (p.chi1 - p.chi2)
    v0 = _null_vector_2x2(sys.b0, base, rank_tol)
    v1 = _null_vector_2x2(sys.residues[0], p.chi2 * base, rank_tol)
    v2 = _null_vector_2x2(sys.residues[1], p.chi2 * base, rank_tol)
    return v0, v1, v2


@dataclass(frozen=True)
class ScalarThreeTerm:
    """c_plus(x) u(qx) + c_zero(x) u(x) + c_minus(x) u(x/q) = 0."""

    c_plus: Callable
    c_zero: Callable
    c_minus: Callable
    q: complex
    regular: Callable | None = field(default=None, compare=False)

    def coefficients(self, x):
        return self.c_plus(x), self.c_zero(x), self.c_minus(x)

    def apply(self, u_qx, u_x, u_xq, x) -> complex:
        cp, cz, cm = self.coefficients(x)
        return cp * u_qx + cz * u_x + cm * u_xq

    def relative_residual(self, u_qx, u_x, u_xq, x) -> float:
        """|sum of terms| / sum of |terms|."""
        cp, cz, cm = self.coefficients(x)
        terms = (cp * u_qx, cz * u_x, cm * u_xq)
        scale = sum(abs(v) for v in terms)
        return 0.0 if scale == 0 else abs(sum(terms)) / scale

    def scaled(self, factor) -> "ScalarThreeTerm":
        return ScalarThreeTerm(
            lambda x: factor * self.c_plus(x),
            lambda x: factor * self.c_zero(x),
            lambda x: factor * self.c_minus(x),
            self.q,
            None if self.regular is None else (lambda x: factor * self.regular(x)),
        )

    def regauged(self, ratio) -> "ScalarThreeTerm":
        """Equation for v with u(x) = psi(x) v(x), psi(qx) = ratio * psi(x)."""
        return ScalarThreeTerm(
            lambda x: ratio * self.c_plus(x),
            self.c_zero,
            lambda x: self.c_minus(x) / ratio,
            self.q,
            self.regular,
        )


def scalar_reduce(sys, q, d0=None, gauge_poles: Sequence = (), rng=None) -> ScalarThreeTerm:
    """Eliminate y2 from a 2x2 system Y(qx) = M(x) Y(x).

    The result is the equation for u = y1 / phi with
    phi(qx) = d0 * prod(x - p for p in gauge_poles) * phi(x); ``d0=None``
    means no gauge (u = y1).
    """
    m = sys.evaluate
    rng = np.random.default_rng(0) if rng is None else rng
    probes = rng.normal(size=4) + 1j * rng.normal(size=4)
    if all(abs(m(x)[0, 1]) <= ZETA * np.linalg.norm(m(x)) for x in probes):
        raise ReducibleSystemError("upper-right entry vanishes identically")

    def gauge(x):
        if d0 is None:
            return 1.0
        out = d0
        for pole in gauge_poles:
            out = out * (x - pole)
        return out

    def c_plus(x):
        return gauge(x) / m(x)[0, 1]

    def c_zero(x):
        mx, mq = m(x), m(x / q)
        return -(mx[0, 0] / mx[0, 1] + mq[1, 1] / mq[0, 1])

    def c_minus(x):
        mq = m(x / q)
        return np.linalg.det(mq) / (mq[0, 1] * gauge(x / q))

    return ScalarThreeTerm(c_plus, c_zero, c_minus, complex(q))


def js_scalar_equation(p: QPVIParams, d0) -> ScalarThreeTerm:
    """Closed form of the eliminated scalar equation for u = y1 / phi.

    The u(x) coefficient is written as a linear polynomial (``regular``)
    plus the two terms whose poles at x = y, x = qy pair with the shifts.
    """
    q, t, y, z = p.q, p.t, p.y, p.z
    chi1, chi2, a1, a2, a3, a4 = p.chi1, p.chi2, p.a1, p.a2, p.a3, p.a4
    th1, th2 = p.theta1, p.theta2
    ta12 = t * a1 * a2

    def regular(x):
        return (x * (q * z * chi1 - 1) * (z * chi2 - 1) / (q**2 * z)
                - chi1 * chi2 * a3 * a4 * (q * z - ta12 / th1) * (q * z - ta12 / th2) / (q**2 * y * z))

    def t_minus(x):
        return chi1 * chi2 * (a3 - x / q) * (a4 - x / q) / (q * y - x)

    def t_plus(x):
        return (x - t * a1) * (x - t * a2) / (q * (y - x))

    return ScalarThreeTerm(
        lambda x: -t_plus(x) * d0,
        lambda x: regular(x) + q * z * t_minus(x) + t_plus(x) / (q * z),
        lambda x: -t_minus(x) / d0,
        q,
        regular,
    )


def y1_equation(p: QPVIParams) -> ScalarThreeTerm:
    """Scalar equation of the first component of a B-system solution."""
    return js_scalar_equation(p, p.c0).scaled(p.q**2)
