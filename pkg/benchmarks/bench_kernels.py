"""Compiled vs numpy kernels: timings and agreement.

    python benchmarks/bench_kernels.py [--repeat 5] [--json]

Both backends are imported directly, so one run compares them regardless
of QMIDDLE_PURE_PYTHON. Exits 1 if the compiled extension is missing.
"""
from __future__ import annotations

import argparse
import json
import sys
import timeit

import numpy as np

from qmiddle import _kernels_py as pure

try:
    from qmiddle import _kernels as compiled
except ImportError:
    compiled = None


def cases():
    rng = np.random.default_rng(0)
    q = 0.5 * np.exp(0.7j)
    xi = 0.9 * np.exp(0.2j)
    # one Jackson lattice of half-width 120, as in the transform campaigns
    s = xi * q ** np.arange(-120, 121).astype(float)
    mats = rng.normal(size=(240, 2, 2)) + 1j * rng.normal(size=(240, 2, 2))
    mats /= np.linalg.norm(mats, axis=(1, 2))[:, None, None]
    y0 = np.array([1.0 + 0j, 0.5j])
    return {
        "qpoch(n=10000)": lambda k: k.qpoch(0.3 + 0.2j, q, 10000),
        "p_lambda_array(241 points, 120 terms)": lambda k: k.p_lambda_array(1.3 * np.sqrt(q), s, 0.6j, q, 120),
        "chain(240 steps, 2x2)": lambda k: k.chain(mats, y0),
    }


def run(repeat: int) -> list:
    rows = []
    for name, fn in cases().items():
        t_py = min(timeit.repeat(lambda: fn(pure), number=1, repeat=repeat))
        ref = np.asarray(fn(pure))
        row = {"kernel": name, "pythonSeconds": t_py}
        if compiled is not None:
            t_c = min(timeit.repeat(lambda: fn(compiled), number=1, repeat=repeat))
            got = np.asarray(fn(compiled))
            row.update(compiledSeconds=t_c, speedup=t_py / t_c,
                       maxRelDiff=float(np.max(np.abs(got - ref)) / np.max(np.abs(ref))))
        rows.append(row)
    return rows


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", action="store_true", help="print JSON instead of a table")
    args = ap.parse_args(argv)
    rows = run(args.repeat)
    if args.json:
        print(json.dumps(rows, indent=2))
    else:
        print(f"{'kernel':42s} {'python ms':>10s} {'compiled ms':>12s} {'speedup':>8s} {'max rel diff':>13s}")
        for r in rows:
            c = r.get("compiledSeconds")
            print(f"{r['kernel']:42s} {1e3 * r['pythonSeconds']:10.3f} "
                  + (f"{1e3 * c:12.3f} {r['speedup']:8.1f} {r['maxRelDiff']:13.2e}" if c else f"{'-':>12s}"))
    if compiled is None:
        print("compiled extension not built; only the numpy kernels were timed", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
