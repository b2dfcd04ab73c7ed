"""The affine Weyl group W(D5^(1)) acting on KNY parameters.

Generators s0..s5 act birationally on (kappa1, kappa2, nu1..nu8, f, g).
Words are read as automorphisms of the function field: for a word
``s_a s_b ... s_z`` the point map applies ``s_a`` first and ``s_z`` last,
which is the order that makes s2 s0 s1 s2 (g) come out as
g (f - nu3)(f - nu4) / ((f - kappa1/nu7)(f - kappa1/nu8)).
"""
from __future__ import annotations

import dataclasses
import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ConstraintError, DegenerateParameterError, IndeterminatePointError, InvalidInputError
from .numerics import ZETA
from .qpvi import QPVIParams, ScalarThreeTerm, parse_complex, random_qpvi_params, rel_diff
from .reports import CheckReport

KNY_FIELDS = ("q", "kappa1", "kappa2", "nu1", "nu2", "nu3", "nu4", "nu5", "nu6", "nu7", "nu8", "f", "g")
#: the twelve coordinates the group acts on (q is a spectator)
ACTED_FIELDS = KNY_FIELDS[1:]

#: Dynkin diagram of D5^(1): 0-2, 1-2, 2-3, 3-4, 3-5
DYNKIN_EDGES = frozenset({(0, 2), (1, 2), (2, 3), (3, 4), (3, 5)})


@dataclass(frozen=True)
class KNYParams:
    """KNY coordinates with kappa1^2 kappa2^2 = q nu1 ... nu8."""

    q: complex
    kappa1: complex
    kappa2: complex
    nu1: complex
    nu2: complex
    nu3: complex
    nu4: complex
    nu5: complex
    nu6: complex
    nu7: complex
    nu8: complex
    f: complex
    g: complex

    def __post_init__(self):
        for name in KNY_FIELDS:
            object.__setattr__(self, name, complex(getattr(self, name)))

    @property
    def nu(self) -> tuple:
        return (self.nu1, self.nu2, self.nu3, self.nu4, self.nu5, self.nu6, self.nu7, self.nu8)

    def constraint_residual(self) -> float:
        lhs = self.kappa1**2 * self.kappa2**2
        return abs(lhs - self.q * np.prod(self.nu)) / abs(lhs)

    def check(self, tol: float = 1e3 * ZETA) -> "KNYParams":
        for name in KNY_FIELDS[:-2]:
            if getattr(self, name) == 0:
                raise DegenerateParameterError(f"parameter {name} must be nonzero")
        if self.constraint_residual() > tol:
            raise ConstraintError("kappa1^2 kappa2^2 = q nu1 ... nu8", self.constraint_residual())
        return self

    def replace(self, **changes) -> "KNYParams":
        return dataclasses.replace(self, **changes)

    def as_vector(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in ACTED_FIELDS])

    def to_json(self) -> dict:
        return {name: [getattr(self, name).real, getattr(self, name).imag] for name in KNY_FIELDS}

    @classmethod
    def from_json(cls, data: dict) -> "KNYParams":
        return cls(**{name: parse_complex(data[name]) for name in KNY_FIELDS})


@dataclass(frozen=True)
class WeylWord:
    letters: tuple

    def __post_init__(self):
        letters = tuple(int(i) for i in self.letters)
        if any(not 0 <= i <= 5 for i in letters):
            raise InvalidInputError(f"generator indices must lie in 0..5, got {letters}")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def parse(cls, text: str) -> "WeylWord":
        """``"s5s2s1"`` or ``"5 2 1"`` or ``"521"``."""
        digits = [c for c in text if c.isdigit()]
        return cls(tuple(int(c) for c in digits))

    def __str__(self) -> str:
        return "".join(f"s{i}" for i in self.letters) or "id"

    def __mul__(self, other: "WeylWord") -> "WeylWord":
        return WeylWord(self.letters + other.letters)

    def __pow__(self, k: int) -> "WeylWord":
        return WeylWord(self.letters * k)


#: the word realising the q-middle convolution with c~ = chi2
PROP41_WORD = WeylWord.parse("s5s2s1s0s2s3s2s0s1s2")


def _ratio(num, den, scale, what):
    """num / den on the projective line; 0/0 is refused."""
    if abs(den) <= ZETA * scale:
        if abs(num) <= ZETA * scale:
            raise IndeterminatePointError(f"{what} is 0/0")
        return complex("inf")
    return num / den


def apply_generator(i: int, p: KNYParams) -> KNYParams:
    """The generator s_i on a point; untouched coordinates are copied."""
    if i == 0:
        return p.replace(nu7=p.nu8, nu8=p.nu7)
    if i == 1:
        return p.replace(nu3=p.nu4, nu4=p.nu3)
    if i == 4:
        return p.replace(nu1=p.nu2, nu2=p.nu1)
    if i == 5:
        return p.replace(nu5=p.nu6, nu6=p.nu5)
    if i == 2:
        k1, n3, n7 = p.kappa1, p.nu3, p.nu7
        scale = max(abs(p.f), abs(n3), abs(k1 / n7))
        g = p.g * _ratio(p.f - n3, p.f - k1 / n7, scale, "s2 action on g")
        return p.replace(nu3=k1 / n7, nu7=k1 / n3, kappa2=k1 * p.kappa2 / (n3 * n7), g=g)
    if i == 3:
        k2, n1, n5 = p.kappa2, p.nu1, p.nu5
        scale = max(abs(p.g), abs(1 / n1), abs(n5 / k2))
        f = p.f * _ratio(p.g - 1 / n1, p.g - n5 / k2, scale, "s3 action on f")
        return p.replace(nu1=k2 / n5, nu5=k2 / n1, kappa1=p.kappa1 * k2 / (n1 * n5), f=f)
    raise InvalidInputError(f"generator index {i} out of range")


def apply_word(w, p: KNYParams) -> KNYParams:
    """Apply a word, leftmost letter first (automorphism convention)."""
    w = w if isinstance(w, WeylWord) else WeylWord(tuple(w))
    for i in w.letters:
        p = apply_generator(i, p)
    return p


def deviation(a: KNYParams, b: KNYParams, fields=ACTED_FIELDS) -> float:
    return max(rel_diff(getattr(a, n), getattr(b, n)) for n in fields)


def relation_order(i: int, j: int) -> int:
    if i == j:
        return 1
    return 3 if (min(i, j), max(i, j)) in DYNKIN_EDGES else 2


def relation_table() -> list:
    """(i, j, m) with (s_i s_j)^m = id: 6 involutions then 15 pairs."""
    out = [(i, i, 2) for i in range(6)]
    out += [(i, j, relation_order(i, j)) for i, j in itertools.combinations(range(6), 2)]
    return out


# ---------------------------------------------------------------------------
# dictionary with the Jimbo-Sakai parameters


def js_to_kny(p: QPVIParams, kappa1=1.0, kappa2=1.0) -> KNYParams:
    """KNY coordinates of a JS tuple in the gauge (kappa1, kappa2).

    chi1 = nu1, chi2 = q nu2, a3 = nu3, a4 = nu4, t a1 = kappa1/nu7,
    t a2 = kappa1/nu8, t a1 a2/theta_i = nu_{4+i}/kappa2, y = f, qz = g.
    """
    ta12 = p.t * p.a1 * p.a2
    return KNYParams(
        q=p.q, kappa1=kappa1, kappa2=kappa2,
        nu1=p.chi1, nu2=p.chi2 / p.q, nu3=p.a3, nu4=p.a4,
        nu5=kappa2 * ta12 / p.theta1, nu6=kappa2 * ta12 / p.theta2,
        nu7=kappa1 / (p.t * p.a1), nu8=kappa1 / (p.t * p.a2),
        f=p.y, g=p.q * p.z,
    )


def kny_to_js(k: KNYParams, t=1.0, w=1.0) -> QPVIParams:
    """Inverse dictionary; ``t`` and ``w`` are the gauges the KNY side forgets."""
    t = complex(t)
    a1 = k.kappa1 / (k.nu7 * t)
    a2 = k.kappa1 / (k.nu8 * t)
    ta12 = t * a1 * a2
    return QPVIParams(
        q=k.q, t=t, a1=a1, a2=a2, a3=k.nu3, a4=k.nu4, chi1=k.nu1, chi2=k.q * k.nu2,
        theta1=ta12 * k.kappa2 / k.nu5, theta2=ta12 * k.kappa2 / k.nu6,
        y=k.f, z=k.g / k.q, w=w,
    )


def random_kny_params(rng: np.random.Generator, gauge: bool = True) -> KNYParams:
    """Constrained KNY draw; with ``gauge`` the kappas are random too."""
    p = random_qpvi_params(rng)
    if not gauge:
        return js_to_kny(p)
    k1, k2 = (rng.uniform(0.5, 2.0) * np.exp(2j * np.pi * rng.uniform()) for _ in range(2))
    return js_to_kny(p, k1, k2)


# ---------------------------------------------------------------------------
# the Lax operator L1


def l1_operator(k: KNYParams) -> ScalarThreeTerm:
    """L1 y = c+(x) y(qx) + c0(x) y(x) + c-(x) y(x/q)."""
    q, f, g = k.q, k.f, k.g
    n1, n2, n3, n4, n5, n6, n7, n8 = k.nu
    k1, k2 = k.kappa1, k.kappa2

    def bracket(x):
        return x * (g * n1 - 1) * (g * n2 - 1) / (q * g) - n1 * n2 * n3 * n4 * (g - n5 / k2) * (g - n6 / k2) / (f * g)

    def lower(x):
        return n1 * n2 * (x - q * n3) * (x - q * n4) / (q * (q * f - x))

    def upper(x):
        return (x - k1 / n7) * (x - k1 / n8) / (q * (f - x))

    return ScalarThreeTerm(
        lambda x: -upper(x),
        lambda x: bracket(x) + g * lower(x) + upper(x) / g,
        lambda x: -lower(x),
        q,
        bracket,
    )


# ---------------------------------------------------------------------------
# reports


def check_relations(trials: int, tol: float = 1e-9, rng=None, constraint_tol: float = 1e-10) -> list:
    """Involutions, pair relations and constraint preservation at random points."""
    rng = np.random.default_rng(0) if rng is None else rng
    rel = CheckReport("weyl.relations", tol)
    cons = CheckReport("weyl.constraint", constraint_tol)
    table = relation_table()
    for _ in range(trials):
        k = random_kny_params(rng)
        for i, j, m in table:
            word = WeylWord((i,) * 2) if i == j else WeylWord((i, j)) ** m
            rel.record(deviation(apply_word(word, k), k), k, f"(s{i}s{j})^{m}" if i != j else f"s{i}^2")
        for i in range(6):
            cons.record(apply_generator(i, k).constraint_residual(), k, f"s{i}")
        rel.trials += 1
        cons.trials += 1
    return [rel, cons]


def convolution_word_closed_form(k: KNYParams) -> KNYParams:
    """Closed-form image of the convolution word, arrow by arrow."""
    q, k1, k2 = k.q, k.kappa1, k.kappa2
    n1, n2, n3, n4, n5, n6, n7, n8 = k.nu
    f, g = k.f, k.g
    c = q * n2 * n5 / k2
    ratio = (f - n3) * (f - n4) / ((f - k1 / n7) * (f - k1 / n8))
    f_new = (ratio * g - 1 / n1) / (ratio * g - k2 / (q * n1 * n2 * n5)) * f
    g_new = ratio * (f_new - k1 / n7) * (f_new - k1 / n8) / ((f_new - c * n3) * (f_new - c * n4)) * g
    return KNYParams(
        q=q, kappa1=c * k1, kappa2=q**2 * n2**2 * n5**2 / k2,
        nu1=c * n1, nu2=n2, nu3=c * n3, nu4=c * n4, nu5=c * n6, nu6=n5, nu7=c * n7, nu8=c * n8,
        f=f_new, g=g_new,
    )


def s2s0s1s2_g(k: KNYParams) -> complex:
    """The intermediate display for s2 s0 s1 s2 (g)."""
    return (k.f - k.nu3) * (k.f - k.nu4) / ((k.f - k.kappa1 / k.nu7) * (k.f - k.kappa1 / k.nu8)) * k.g


def verify_prop41(p: QPVIParams, report: CheckReport | None = None, kappa=(1.0, 1.0)) -> CheckReport:
    """q-middle convolution with c~ = chi2 against the word s5s2s1s0s2s3s2s0s1s2.

    The dictionary fixes only the ratios kappa/nu, so the mapped JS tuple is
    read in the kappa gauge produced by the word; the kappa components of
    the word are checked separately against the displayed arrows.
    """
    from .engine import parameter_map_mc

    report = CheckReport("weyl.convolution_word", 1e-9) if report is None else report
    k = js_to_kny(p, *kappa)
    by_word = apply_word(PROP41_WORD, k)
    mapped = parameter_map_mc(p, p.chi2, "chi2")
    by_mc = js_to_kny(mapped, by_word.kappa1, by_word.kappa2)
    closed = convolution_word_closed_form(k)
    for name in ACTED_FIELDS:
        report.record(rel_diff(getattr(by_word, name), getattr(by_mc, name)), p, f"mc:{name}")
        report.record(rel_diff(getattr(by_word, name), getattr(closed, name)), p, f"display:{name}")
    report.record(rel_diff(apply_word(WeylWord.parse("s2s0s1s2"), k).g, s2s0s1s2_g(k)), p, "s2s0s1s2(g)")
    report.record(rel_diff(apply_word(WeylWord.parse("s2s0s1s2"), k).f, k.f), p, "s2s0s1s2(f)")
    report.trials += 1
    return report


def verify_propA1(p: QPVIParams, report: CheckReport | None = None, kappa=(1.0, 1.0)) -> CheckReport:
    """chi1-branch convolution in the gauge d~ = chi1 t a1 a2/theta1,
    c~ d~^2 = 1 against the single generator s3."""
    from .engine import parameter_map_mc, propA1_gauge

    report = CheckReport("weyl.chi1_reflection", 1e-9) if report is None else report
    k = js_to_kny(p, *kappa)
    by_s3 = apply_generator(3, k)
    c, d = propA1_gauge(p)
    mapped = parameter_map_mc(p, c, "chi1", d)
    by_mc = js_to_kny(mapped, by_s3.kappa1, by_s3.kappa2)
    for name in ACTED_FIELDS:
        report.record(rel_diff(getattr(by_s3, name), getattr(by_mc, name)), p, name)
    report.trials += 1
    return report
