"""Command-line front end.

Every subcommand reads JSON (a file path, inline JSON, or ``-`` for
standard input) and writes JSON to standard output; diagnostics go to
standard error. Complex numbers are two-element arrays [re, im].

Exit codes: 0 pass, 1 check failure, 2 invalid input, 3 runtime
singularity, 64 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .errors import InvalidInputError, QMiddleError, SingularityError
from .numerics import Truncation
from .qpvi import build_A, build_B, complex_json, matrix_json, parse_complex, QPVIParams
from .reports import SCHEMA_VERSION

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_SINGULAR, EXIT_USAGE = 0, 1, 2, 3, 64

EPILOG = """\
JSON conventions: complex numbers are [re, im] pairs; parameter objects use
the field names q, t, a1..a4, chi1, chi2, theta1, theta2, y, z, w (q-PVI),
q, kappa1, kappa2, nu1..nu8, f, g (KNY) and q, h1..h3, l1..l4, E, sign
(q-Heun). Every output object carries "schemaVersion".

Environment: QMIDDLE_HALF_WIDTH and QMIDDLE_PRODUCT_TERMS override the
default truncation; QMIDDLE_PURE_PYTHON=1 forces the numpy kernels.

Exit codes: 0 pass, 1 check failure, 2 invalid input, 3 runtime
singularity, 64 usage error."""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 64."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


# ---------------------------------------------------------------------------
# I/O helpers


def _load(source: str):
    if source == "-":
        return json.load(sys.stdin)
    text = source.strip()
    if text.startswith("{") or text.startswith("["):
        return json.loads(text)
    with open(source, encoding="utf-8") as fh:
        return json.load(fh)


def _read_input(source: str):
    try:
        return _load(source)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read input {source!r}: {exc}") from exc


def _unwrap(data, key: str):
    """Accept either the bare object or ``{"params": {...}}`` as produced by ``params``."""
    if isinstance(data, dict) and key in data and isinstance(data[key], dict):
        return data[key]
    return data


def _parse(cls, data):
    try:
        return cls.from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, QMiddleError):
            raise
        raise InvalidInputError(f"malformed {cls.__name__} JSON: {exc}") from exc


def _jsonable(obj):
    if hasattr(obj, "to_json"):
        return obj.to_json()
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return complex_json(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _emit(payload: dict, out: str = "-") -> None:
    text = json.dumps(_jsonable(dict({"schemaVersion": SCHEMA_VERSION}, **payload)), indent=2, sort_keys=False)
    if out in (None, "-"):
        sys.stdout.write(text + "\n")
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _complex_arg(text: str) -> complex:
    """``1.5``, ``1+2j`` or ``[1, 2]``."""
    try:
        text = text.strip()
        if text.startswith("["):
            return parse_complex(json.loads(text))
        return complex(text.replace(" ", ""))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def _qpvi_input(args) -> QPVIParams:
    if args.input is None:
        from .qpvi import random_qpvi_params

        return random_qpvi_params(np.random.default_rng(args.seed))
    return _parse(QPVIParams, _unwrap(_read_input(args.input), "params")).check()


# ---------------------------------------------------------------------------
# subcommands


def cmd_params(args) -> int:
    """Validate (or draw) a q-PVI tuple and print A(x) and the B-system."""
    if args.convergent and args.input is None:
        from .jackson import convergent_qpvi_params

        p = convergent_qpvi_params(np.random.default_rng(args.seed))
    else:
        p = _qpvi_input(args)
    _emit({
        "params": p,
        "constraintResidual": p.constraint_residual(),
        "A": [matrix_json(c) for c in build_A(p).coefficients],
        "B": build_B(p),
    }, args.out)
    return EXIT_OK


def cmd_mc(args) -> int:
    """Closed-form middle convolution and the mapped parameters."""
    from .engine import closed_form_mc, gauge_w_after, parameter_map_mc, transformed_A

    if args.branch == "chi1" and args.d_tilde is None:
        raise UsageError("--branch chi1 requires --d-tilde")
    p = _qpvi_input(args)
    c = p.chi2 if args.c_tilde is None else args.c_tilde
    d = args.d_tilde if args.branch == "chi1" else None
    new = parameter_map_mc(p, c, args.branch, d)
    w = gauge_w_after(p, args.branch, c, d)
    _emit({
        "branch": args.branch,
        "cTilde": c,
        "dTilde": d,
        "reducedSystem": closed_form_mc(p, args.branch),
        "transformedA": [matrix_json(m) for m in transformed_A(p, args.branch, c, d).coefficients],
        "newParams": new,
        "gaugeW": w,
    }, args.out)
    return EXIT_OK


def _probes(args, xi, q):
    from .jackson import ProbePoint, probe_points

    if args.probe:
        return [ProbePoint(complex(x), complex(q), 0) for x in args.probe]
    return probe_points(xi, q, args.probes)


def cmd_transform(args) -> int:
    """Build a boundary-free lattice solution and transform it at probe points."""
    from . import jackson, qheun
    from .weyl import js_to_kny

    rng = np.random.default_rng(args.seed)
    base = Truncation.from_env()
    n = args.N if args.N is not None else base.half_width
    trunc = Truncation(args.product_terms or base.product_terms, n)
    data = None if args.input is None else _unwrap(_read_input(args.input), "params")

    if args.kind == "heun":
        if data is None:
            p0 = jackson.convergent_qpvi_params(rng)
            h = qheun.qpvi_to_heun(p0.replace(y=p0.a3))
        else:
            h = _parse(qheun.QHeunParams, data).check()
        h, sol = qheun.boundary_free_heun_solution(h, rng, n, xi=args.xi)
        probes = _probes(args, sol.lattice.xi, h.q)
        report = qheun.heun_transform_report(sol.lattice, h, probes, trunc)
        params, mapped = h, qheun.heun_transform_params(h)
    else:
        p = jackson.convergent_qpvi_params(rng) if data is None else _parse(QPVIParams, data).check()
        sol = jackson.boundary_free_js_solution(p, rng, n, xi=args.xi)
        params = sol.params
        probes = _probes(args, sol.lattice.xi, p.q)
        mapped = None
        if args.kind == "vector":
            report = jackson.mc_vector_report(sol.lattice, params, probes, trunc)
        elif args.kind == "rows":
            report = jackson.rows_vector_report(sol.lattice, params, "chi2", probes, trunc)
        elif args.kind == "scalar":
            report = jackson.scalar_transform_report(sol.lattice, params, probes, trunc)
        else:
            kny = js_to_kny(params)
            report = jackson.kny_transform_report(jackson.kny_solution(sol.lattice, kny), kny, probes, trunc)
            params = kny
    payload = {
        "kind": args.kind,
        "params": params,
        "tunedAccessory": sol.accessory,
        "glueMismatch": sol.mismatch,
        "probes": [pr.value for pr in probes],
        "values": report.to_json()["values"],
        "report": {k: v for k, v in report.to_json().items() if k != "values"},
    }
    if mapped is not None:
        payload["transformedParams"] = mapped
    if args.dump_lattice:
        payload["lattice"] = sol.lattice
    _emit(payload, args.out)
    return EXIT_OK


def cmd_weyl(args) -> int:
    """Apply a word of W(D5^(1)) to a KNY point (or a q-PVI tuple via the dictionary)."""
    from .weyl import KNYParams, WeylWord, apply_word, js_to_kny

    if args.input is None:
        from .weyl import random_kny_params

        k = random_kny_params(np.random.default_rng(args.seed))
    else:
        data = _unwrap(_read_input(args.input), "params")
        if "nu1" in data:
            k = _parse(KNYParams, data).check()
        else:
            k = js_to_kny(_parse(QPVIParams, data).check())
    word = WeylWord.parse(args.word)
    image = apply_word(word, k)
    _emit({
        "word": str(word),
        "input": k,
        "image": image,
        "constraintResidual": image.constraint_residual(),
    }, args.out)
    return EXIT_OK


def cmd_heun(args) -> int:
    """Embed q-Heun data into q-PVI and report the transformed parameters."""
    from .qheun import (QHEUN_FIELDS, QHeunParams, heun_to_qpvi, heun_transform_params, qpvi_to_heun,
                        random_qheun_params)
    from .qpvi import rel_diff

    if args.input is None:
        h = random_qheun_params(np.random.default_rng(args.seed))
    else:
        h = _parse(QHeunParams, _unwrap(_read_input(args.input), "params")).check()
    p = heun_to_qpvi(h)
    back = qpvi_to_heun(p)
    primed = heun_transform_params(h)
    roundtrip = max(rel_diff(getattr(h, k), getattr(back, k)) for k in QHEUN_FIELDS)
    _emit({
        "params": h,
        "qpvi": p,
        "roundtripDeviation": roundtrip,
        "transformedParams": primed,
        "transformedConstraintResidual": primed.constraint_residual(),
        "qLambda": h.q / h.l4,
    }, args.out)
    return EXIT_OK


def cmd_campaign(args) -> int:
    """Run verification campaigns; exit 0 iff every check passes."""
    from .campaign import CampaignConfig, run_campaign

    base = Truncation.from_env()
    cfg = CampaignConfig(trials=args.trials, seed=args.seed, workers=args.workers,
                         truncation=Truncation(args.product_terms or base.product_terms, args.N or base.half_width))
    report = run_campaign(args.which, cfg)
    text = json.dumps(report.to_json(include_runtime=args.timing), indent=2)
    if args.out == "-":
        sys.stdout.write(text + "\n")
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    for name in report.failures():
        print(f"check failed: {name}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_CHECK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qmiddle", description="q-middle convolution toolkit.", epilog=EPILOG,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(cmd, with_input=True):
        if with_input:
            cmd.add_argument("--input", "-i", help="JSON file, inline JSON, or - for stdin; random draw if omitted")
        cmd.add_argument("--seed", type=int, default=0, help="seed for random draws (default 0)")
        cmd.add_argument("--out", "-o", default="-", help="output path, - for stdout (default)")

    p = sub.add_parser("params", help="validate or draw a q-PVI tuple")
    common(p)
    p.add_argument("--convergent", action="store_true", help="draw from the convergent transform regime")
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("mc", help="closed-form middle convolution and parameter map")
    common(p)
    p.add_argument("--branch", choices=("chi2", "chi1"), default="chi2")
    p.add_argument("--c-tilde", type=_complex_arg, help="c~ (default chi2)")
    p.add_argument("--d-tilde", type=_complex_arg, help="d~, required on the chi1 branch")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("transform", help="Jackson-integral transform of a lattice solution")
    common(p)
    p.add_argument("--kind", choices=("vector", "rows", "scalar", "kny", "heun"), default="scalar")
    p.add_argument("--xi", type=_complex_arg, help="lattice base point xi")
    p.add_argument("--N", type=int, help="half-width of the Jackson sum")
    p.add_argument("--product-terms", type=int, help="kernel product terms")
    p.add_argument("--probes", type=int, default=5, help="number of probe points (default 5)")
    p.add_argument("--probe", type=_complex_arg, action="append", help="explicit probe point (repeatable)")
    p.add_argument("--dump-lattice", action="store_true", help="include the lattice values for plotting")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("weyl", help="apply a Weyl-group word")
    common(p)
    p.add_argument("--word", default="s5s2s1s0s2s3s2s0s1s2", help="word such as s2s0s1s2 (leftmost acts first)")
    p.set_defaults(func=cmd_weyl)

    p = sub.add_parser("heun", help="q-Heun dictionary and transformed parameters")
    common(p)
    p.set_defaults(func=cmd_heun)

    p = sub.add_parser("campaign", help="randomized verification campaigns")
    common(p, with_input=False)
    p.add_argument("--which", choices=("identity", "transform", "weyl", "heun", "all"), default="all")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--N", type=int, help="half-width N (the campaign also runs 2N)")
    p.add_argument("--product-terms", type=int)
    p.add_argument("--timing", action="store_true", help="add runtimeSeconds (breaks byte-identical replays)")
    p.set_defaults(func=cmd_campaign)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"qmiddle: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvalidInputError as exc:
        print(f"qmiddle: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SingularityError as exc:
        print(f"qmiddle: singularity: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
