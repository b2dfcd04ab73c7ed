"""Randomized verification campaigns.

Each trial draws from its own generator ``numpy.random.default_rng([seed,
stream, trial])`` (PCG64), so a trial's draws depend only on the seed, the
campaign and the trial index. Trials may run in worker processes; the
reduction always merges per-trial reports in trial order, so the report is
the same whatever the worker count.
"""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, QMiddleError
from .numerics import DEFAULT_TRUNCATION, Truncation
from .qpvi import build_A, build_B, random_qpvi_params, rel_diff
from .reports import SCHEMA_VERSION, CheckReport, TransformCheck

#: default tolerance per check name; every value is echoed into the report
DEFAULT_TOLERANCES = {
    "identity.det_B": 1e-9,
    "identity.det_A": 1e-9,
    "identity.kernel_dims": 0.5,
    "identity.l_direction": 1e-9,
    "identity.p_blocks": 1e-8,
    "identity.generic_mc": 1e-7,
    "identity.parameter_map": 1e-8,
    "transform.convolution": 1e-6,
    "transform.mc_vector": 1e-6,
    "transform.mc_rows": 1e-6,
    "transform.scalar": 1e-6,
    "transform.kny": 1e-6,
    "transform.heun": 1e-6,
    "weyl.relations": 1e-9,
    "weyl.constraint": 1e-10,
    "weyl.convolution_word": 1e-9,
    "weyl.chi1_reflection": 1e-9,
    "heun.roundtrip": 1e-12,
    "heun.equations": 1e-10,
    "heun.primed_constraint": 1e-10,
}

#: stream ids keep the campaigns' draws independent of each other
STREAMS = {"identity": 1, "transform": 2, "weyl": 3, "heun": 4}
CAMPAIGNS = ("identity", "transform", "weyl", "heun")


@dataclass(frozen=True)
class CampaignConfig:
    trials: int = 50
    seed: int = 0
    q_range: tuple = (0.2, 0.7)
    tolerances: dict = field(default_factory=dict)
    truncation: Truncation = DEFAULT_TRUNCATION
    decay_factor: float = 10.0
    decay_fraction: float = 0.9
    divergent_probe: bool = True
    workers: int = 1

    def __post_init__(self):
        if int(self.trials) < 1:
            raise InvalidInputError(f"trials must be at least 1, got {self.trials}")
        lo, hi = self.q_range
        if not 0 < lo <= hi < 1:
            raise InvalidInputError(f"q range must satisfy 0 < lo <= hi < 1, got {self.q_range}")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise InvalidInputError(f"unknown tolerance names: {sorted(unknown)}")
        if any(not v > 0 for v in self.tolerances.values()):
            raise InvalidInputError("tolerances must be positive")
        if self.workers < 1:
            raise InvalidInputError("workers must be at least 1")

    def tol(self, name: str) -> float:
        return float(self.tolerances.get(name, DEFAULT_TOLERANCES[name]))

    def rng(self, campaign: str, trial: int) -> np.random.Generator:
        return np.random.default_rng([int(self.seed), STREAMS[campaign], int(trial)])

    def to_json(self) -> dict:
        return {
            "trials": int(self.trials),
            "seed": int(self.seed),
            "qRange": list(self.q_range),
            "truncation": {"halfWidth": self.truncation.half_width,
                           "productTerms": self.truncation.product_terms},
            "decayFactor": self.decay_factor,
            "decayFraction": self.decay_fraction,
        }


@dataclass
class CampaignReport:
    """Checks of one or more campaigns; ``runtime`` is wall-clock seconds.

    The runtime is left out of :meth:`to_json` unless asked for, so that two
    runs with the same seed serialize identically.
    """

    campaign: str
    config: CampaignConfig
    checks: list
    runtime: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self) -> list:
        return [c.name for c in self.checks if not c.passed]

    def to_json(self, include_runtime: bool = False) -> dict:
        out = {
            "schemaVersion": SCHEMA_VERSION,
            "campaign": self.campaign,
            "config": self.config.to_json(),
            "passed": self.passed,
            "failures": self.failures(),
            "checks": [c.to_json() for c in self.checks],
        }
        if include_runtime:
            out["runtimeSeconds"] = self.runtime
        return out


# ---------------------------------------------------------------------------
# plumbing


def _run_trials(cfg: CampaignConfig, trial_fn, campaign: str) -> list:
    """Per-trial report lists, in trial order."""
    jobs = [(cfg, campaign, i) for i in range(int(cfg.trials))]
    if cfg.workers == 1:
        return [trial_fn(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(trial_fn, *zip(*jobs)))


def _reduce(per_trial: list) -> list:
    merged = {}
    for reports in per_trial:
        for rep in reports:
            if rep.name in merged:
                merged[rep.name].merge(rep)
            else:
                merged[rep.name] = rep
    return list(merged.values())


def _campaign(cfg: CampaignConfig, campaign: str, trial_fn, extra=()) -> CampaignReport:
    start = time.perf_counter()
    checks = _reduce(_run_trials(cfg, trial_fn, campaign) + list(extra))
    return CampaignReport(campaign, cfg, checks, time.perf_counter() - start)


def _guarded(report: CheckReport, params, key: str, fn):
    """Record ``fn()``; a library error inside a check records inf."""
    try:
        report.record(fn(), params, key)
    except QMiddleError as exc:
        report.record(float("inf"), params, f"{key}:{type(exc).__name__}")


#: rank tolerances tried in order; the engine refuses ambiguous rank calls,
#: the campaign retries at neighbouring tolerances and records which one held
RANK_LADDER = (1e-9, 1e-10, 1e-11, 1e-8)


def _subspaces(sys, tup, report: CheckReport | None = None, params=None):
    from .engine import compute_subspaces
    from .errors import RankAmbiguityError

    for tol in RANK_LADDER:
        try:
            sub = compute_subspaces(sys, tup, tol)
        except RankAmbiguityError as exc:
            last = exc
            continue
        if report is not None and tol != RANK_LADDER[0]:
            report.record(0.0, params, f"rank tol {tol:g}")
        return sub
    raise last


def _charpoly_distance(a: np.ndarray, b: np.ndarray) -> float:
    pa, pb = np.poly(a), np.poly(b)
    return float(np.linalg.norm(pa - pb) / max(np.linalg.norm(pb), 1e-300))


def _matrix_rel(a: np.ndarray, b: np.ndarray, scale=None) -> float:
    scale = np.linalg.norm(b) if scale is None else scale
    return float(np.linalg.norm(a - b) / max(scale, 1e-300))


def _polar(rng, lo, hi):
    return rng.uniform(lo, hi) * np.exp(2j * np.pi * rng.uniform())


# ---------------------------------------------------------------------------
# identity campaign


L_DIRECTIONS = {"chi2": np.array([0, 1, 0, 1, 0, 1], dtype=complex),
                "chi1": np.array([1, 0, 1, 0, 1, 0], dtype=complex)}


def _identity_trial(cfg: CampaignConfig, campaign: str, trial: int) -> list:
    from .engine import (closed_form_mc, conjugated_blocks, gauge_w_after,
                         js_convolution, parameter_map_mc, propA1_gauge, quotient_matrices,
                         transformed_A)

    rng = cfg.rng(campaign, trial)
    p = random_qpvi_params(rng, cfg.q_range)
    names = ("det_B", "det_A", "kernel_dims", "l_direction", "p_blocks", "generic_mc", "parameter_map")
    rep = {n: CheckReport(f"identity.{n}", cfg.tol(f"identity.{n}")) for n in names}

    sys = build_B(p)
    for key, mat in zip(("B0", "B1", "B2"), (sys.b0,) + tuple(sys.residues)):
        rep["det_B"].record(abs(np.linalg.det(mat)) / np.linalg.norm(mat) ** 2, p, key)

    amat = build_A(p)
    for x in rng.normal(size=8) + 1j * rng.normal(size=8):
        x *= 1.5
        expect = (p.chi1 * p.chi2 * (x - p.t * p.a1) * (x - p.t * p.a2) * (x - p.a3) * (x - p.a4))
        rep["det_A"].record(rel_diff(amat.det(x), expect), p, "factorization")

    mix = rng.normal(size=3) + 1j * rng.normal(size=3)
    for branch in ("chi2", "chi1"):
        def dims():
            sub = _subspaces(sys, js_convolution(p, branch), rep["kernel_dims"], p)
            return abs(sub.dim_k - 3) + abs(sub.dim_l - 1)

        def direction():
            sub = _subspaces(sys, js_convolution(p, branch))
            if sub.dim_l != 1:
                return float("inf")
            v, e = sub.l_basis[:, 0], L_DIRECTIONS[branch]
            return 1 - abs(np.vdot(e, v)) / (np.linalg.norm(e) * np.linalg.norm(v))

        def blocks():
            conj = conjugated_blocks(p, branch)
            closed = closed_form_mc(p, branch)
            worst = 0.0
            for m, c in zip(conj, (closed.b_inf,) + tuple(closed.residues)):
                worst = max(worst, _matrix_rel(m[:2, :2], c), _matrix_rel(m[:2, 2:], 0 * m[:2, 2:], np.linalg.norm(m)))
            return worst

        def generic():
            tup = js_convolution(p, branch)
            mats = quotient_matrices(tup, _subspaces(sys, tup))
            closed = closed_form_mc(p, branch)
            ref = (closed.b_inf,) + tuple(closed.residues)
            worst = max(_charpoly_distance(m, c) for m, c in zip(mats, ref))
            # a random pencil tests simultaneous similarity, not just each matrix
            pencil = sum(w * m for w, m in zip(mix, mats))
            return max(worst, _charpoly_distance(pencil, sum(w * c for w, c in zip(mix, ref))))

        gauges = [(p.chi2 if branch == "chi2" else propA1_gauge(p)[0], None if branch == "chi2" else propA1_gauge(p)[1]),
                  (_polar(rng, 0.5, 2.0), None if branch == "chi2" else _polar(rng, 0.5, 2.0))]

        def pmap(c, d):
            new = parameter_map_mc(p, c, branch, d)
            w = gauge_w_after(p, branch, c, d)
            target = transformed_A(p, branch, c, d).coefficients
            got = build_A(new.replace(w=w)).coefficients
            scale = max(np.linalg.norm(m) for m in target)
            return max(max(_matrix_rel(g, t, scale) for g, t in zip(got, target)), new.constraint_residual())

        _guarded(rep["kernel_dims"], p, branch, dims)
        _guarded(rep["l_direction"], p, branch, direction)
        _guarded(rep["p_blocks"], p, branch, blocks)
        _guarded(rep["generic_mc"], p, branch, generic)
        for label, (c, d) in zip(("distinguished", "random"), gauges):
            _guarded(rep["parameter_map"], p, f"{branch}:{label}", lambda: pmap(c, d))

    for r in rep.values():
        r.trials = 1
    return list(rep.values())


def run_identity_campaign(cfg: CampaignConfig) -> CampaignReport:
    """Determinants, kernel structure, P-blocks, generic vs closed-form
    convolution and the parameter map over ``cfg.trials`` random tuples."""
    return _campaign(cfg, "identity", _identity_trial)


# ---------------------------------------------------------------------------
# transform campaign


TRANSFORM_KINDS = ("convolution", "mc_vector", "mc_rows", "scalar", "kny", "heun")


def in_convergent_regime(q_lambda, q) -> bool:
    """|q^lambda| < 1 with |q| < 1; the criterion the campaign certifies under."""
    return abs(q_lambda) < 1 and abs(q) < 1


def _pair(report_fn, lattice, n):
    """(residual, residual at 2n, tail mass at n) for a lattice of half-width 2n."""
    small, big = report_fn(lattice.truncated(n)), report_fn(lattice)
    return small.residual, big.residual, small.tail_mass


def _new_checks(cfg):
    return {k: TransformCheck(f"transform.{k}", cfg.tol(f"transform.{k}"), cfg.decay_factor, cfg.decay_fraction)
            for k in TRANSFORM_KINDS}


def _with_redraws(check: TransformCheck, attempt, tries: int = 3):
    """Run ``attempt()`` until it succeeds; failed placements count as redraws."""
    for _ in range(tries):
        try:
            return attempt()
        except QMiddleError:
            check.redraws += 1
    return None


def _transform_trial(cfg: CampaignConfig, campaign: str, trial: int) -> list:
    from .jackson import (boundary_free_js_solution, convergent_qpvi_params, convergent_system,
                          convolution_report, kny_solution, kny_transform_report, lattice_solve,
                          mc_vector_report, rows_vector_report, scalar_transform_report)
    from .qheun import boundary_free_heun_solution, heun_q_lambda, heun_transform_report, qpvi_to_heun
    from .weyl import js_to_kny

    rng = cfg.rng(campaign, trial)
    n = cfg.truncation.half_width
    trunc = cfg.truncation
    checks = _new_checks(cfg)

    def convolution():
        sys, ql, q = convergent_system(rng, q_range=cfg.q_range)
        xi = _polar(rng, 0.7, 1.4)
        seed = rng.normal(size=sys.size) + 1j * rng.normal(size=sys.size)
        y = lattice_solve(sys, xi, seed, 2 * n, q)
        return _pair(lambda f: convolution_report(sys, f, ql, trunc=trunc), y, n), (ql, q), sys

    def js():
        p = convergent_qpvi_params(rng, cfg.q_range)
        return p, boundary_free_js_solution(p, rng, 2 * n)

    def heun():
        p = convergent_qpvi_params(rng, cfg.q_range)
        h = qpvi_to_heun(p.replace(y=p.a3))
        return boundary_free_heun_solution(h, rng, 2 * n)

    got = _with_redraws(checks["convolution"], convolution)
    if got is not None:
        (r1, r2, tail), (ql, q), sys = got
        if in_convergent_regime(ql, q):
            checks["convolution"].record(r1, r2, tail, sys)
        else:
            checks["convolution"].flagged += 1

    got = _with_redraws(checks["scalar"], js)
    if got is not None:
        _, sol = got
        tuned = sol.params
        y = sol.lattice
        kappa = (_polar(rng, 0.5, 2.0), _polar(rng, 0.5, 2.0))
        kny = js_to_kny(tuned, *kappa)
        runs = {
            "mc_vector": lambda f: mc_vector_report(f, tuned, trunc=trunc),
            "mc_rows": lambda f: rows_vector_report(f, tuned, "chi2", trunc=trunc),
            "scalar": lambda f: scalar_transform_report(f, tuned, trunc=trunc),
        }
        for kind, fn in runs.items():
            checks[kind].record(*_pair(fn, y, n), tuned)
        checks["kny"].record(*_pair(lambda f: kny_transform_report(f, kny, trunc=trunc),
                                    kny_solution(y, kny), n), kny)

    got = _with_redraws(checks["heun"], heun)
    if got is not None:
        h, sol = got
        if in_convergent_regime(heun_q_lambda(h), h.q):
            checks["heun"].record(*_pair(lambda f: heun_transform_report(f, h, trunc=trunc), sol.lattice, n), h)
        else:
            checks["heun"].flagged += 1
    return list(checks.values())


def divergent_probe(cfg: CampaignConfig) -> TransformCheck:
    """One deliberately divergent draw, |q^lambda| = 1.2 / |q|.

    The regime test flags it before any residual is trusted; the residuals
    are still computed so the report shows what a divergent sum looks like.
    """
    from .jackson import convergent_system, convolution_report, lattice_solve

    rng = cfg.rng("transform", -1 % 2**32)
    check = TransformCheck("transform.convolution", cfg.tol("transform.convolution"),
                           cfg.decay_factor, cfg.decay_fraction)
    sys, ql, q = convergent_system(rng, q_range=cfg.q_range)
    ql = ql / abs(ql) * 1.2 / abs(q)
    if in_convergent_regime(ql, q):  # pragma: no cover - |q| < 1 makes this impossible
        raise AssertionError("divergent probe landed in the convergent regime")
    check.flagged += 1
    try:
        n = cfg.truncation.half_width
        y = lattice_solve(sys, _polar(rng, 0.7, 1.4), rng.normal(size=sys.size) + 0j, 2 * n, q)
        convolution_report(sys, y.truncated(n), ql, trunc=cfg.truncation)
    except (QMiddleError, FloatingPointError, OverflowError):
        pass
    return check


def run_transform_campaign(cfg: CampaignConfig) -> CampaignReport:
    """Residuals of every integral transform at N and 2N, per trial."""
    extra = [[divergent_probe(cfg)]] if cfg.divergent_probe else []
    return _campaign(cfg, "transform", _transform_trial, extra)


# ---------------------------------------------------------------------------
# Weyl-group campaign


def _weyl_trial(cfg: CampaignConfig, campaign: str, trial: int) -> list:
    from .weyl import check_relations, verify_prop41, verify_propA1

    rng = cfg.rng(campaign, trial)
    rel, cons = check_relations(1, cfg.tol("weyl.relations"), rng, cfg.tol("weyl.constraint"))
    word = CheckReport("weyl.convolution_word", cfg.tol("weyl.convolution_word"))
    refl = CheckReport("weyl.chi1_reflection", cfg.tol("weyl.chi1_reflection"))
    p = random_qpvi_params(rng, cfg.q_range)
    kappa = (_polar(rng, 0.5, 2.0), _polar(rng, 0.5, 2.0))
    for report, fn in ((word, verify_prop41), (refl, verify_propA1)):
        try:
            fn(p, report, kappa)
        except QMiddleError as exc:
            report.record(float("inf"), p, type(exc).__name__)
            report.trials += 1
    return [rel, cons, word, refl]


def run_weyl_campaign(cfg: CampaignConfig) -> CampaignReport:
    """Group relations, constraint preservation, and the two convolution
    maps against their Weyl-group words."""
    return _campaign(cfg, "weyl", _weyl_trial)


# ---------------------------------------------------------------------------
# q-Heun campaign


def _proportionality(a, b, points) -> float:
    """Spread of the coefficient ratios a/b across the three terms.

    Two three-term equations are the same equation when their coefficients
    agree up to a factor depending on x, so the spread is taken per point.
    """
    worst = 0.0
    for x in points:
        ratios = np.array(a.coefficients(x)) / np.array(b.coefficients(x))
        worst = max(worst, float(np.max(np.abs(ratios - ratios[0])) / abs(ratios[0])))
    return worst


def _heun_trial(cfg: CampaignConfig, campaign: str, trial: int) -> list:
    from .qheun import (QHEUN_FIELDS, build_qheun, heun_cy1_display, heun_to_qpvi,
                        heun_transform_params, qpvi_to_heun, random_qheun_params)
    from .qpvi import y1_equation

    rng = cfg.rng(campaign, trial)
    names = ("roundtrip", "equations", "primed_constraint")
    rep = {k: CheckReport(f"heun.{k}", cfg.tol(f"heun.{k}")) for k in names}
    h = random_qheun_params(rng)
    gauge = (_polar(rng, 0.5, 2.0), _polar(rng, 0.5, 2.0))

    def roundtrip():
        back = qpvi_to_heun(heun_to_qpvi(h, theta1=gauge[0], t=gauge[1]))
        return max(max(rel_diff(getattr(h, k), getattr(back, k)) for k in QHEUN_FIELDS),
                   0.0 if back.sign == h.sign else float("inf"))

    points = 1.5 * (rng.normal(size=3) + 1j * rng.normal(size=3))

    def equations():
        p = heun_to_qpvi(h)
        return max(_proportionality(build_qheun(h), y1_equation(p), points),
                   _proportionality(build_qheun(heun_transform_params(h)), heun_cy1_display(p, h.E), points))

    _guarded(rep["roundtrip"], h, "dictionary", roundtrip)
    _guarded(rep["equations"], h, "embedding", equations)
    _guarded(rep["primed_constraint"], h, "displayed", lambda: heun_transform_params(h).constraint_residual())
    for r in rep.values():
        r.trials = 1
    return list(rep.values())


def run_heun_campaign(cfg: CampaignConfig) -> CampaignReport:
    """Dictionary round trip, equation identities and the primed constraint."""
    return _campaign(cfg, "heun", _heun_trial)


RUNNERS = {
    "identity": run_identity_campaign,
    "transform": run_transform_campaign,
    "weyl": run_weyl_campaign,
    "heun": run_heun_campaign,
}


def run_campaign(which: str, cfg: CampaignConfig) -> CampaignReport:
    """One campaign by name, or ``"all"`` for every campaign in order."""
    if which == "all":
        start = time.perf_counter()
        parts = [RUNNERS[name](cfg) for name in CAMPAIGNS]
        checks = [c for part in parts for c in part.checks]
        return CampaignReport("all", cfg, checks, time.perf_counter() - start)
    if which not in RUNNERS:
        raise InvalidInputError(f"unknown campaign {which!r}; choose from {CAMPAIGNS + ('all',)}")
    return RUNNERS[which](cfg)
