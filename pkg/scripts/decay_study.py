"""Fitted early/late slopes of the linear flow for m in {0, 1}, p in {2, 4, inf}.

    python3 scripts/decay_study.py --omega 10 --sigma 0.01 --out out/decay-study
"""

import argparse
import json
import time
from pathlib import Path

import numpy as np

from rotns.decay import linear_decay_experiment
from rotns.wholespace.data import WholeSpaceDatum


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--omega", type=float, default=10.0)
    ap.add_argument("--sigma", type=float, default=0.01)
    ap.add_argument("--family", default="projected-gaussian")
    ap.add_argument("--samples", type=int, default=20)
    ap.add_argument("--m", type=float, nargs="+", default=[0.0, 1.0])
    ap.add_argument("--out", type=Path, default=Path("out/decay-study"))
    args = ap.parse_args()

    early = (0.03 / args.omega, 0.3 / args.omega)
    late = (10 / args.omega, 100 / args.omega)
    times = np.concatenate([np.geomspace(*early, args.samples), np.geomspace(*late, args.samples)])
    norms = [(m, p) for m in args.m for p in (2.0, 4.0, np.inf)]
    t0 = time.perf_counter()
    exp = linear_decay_experiment(WholeSpaceDatum(args.family, args.sigma), args.omega, norms, times,
                                  {"early": early, "late": late})
    args.out.mkdir(parents=True, exist_ok=True)
    rows = [c.as_dict() for c in exp.checks]
    for r in rows:
        print(f"{r['name']:>20s} m={r['m']:g} p={r['p']!s:>4s}  slope {r.get('slope', float('nan')):+.4f}  "
              f"expected {r['expected']:+.4f}  {'pass' if r['passed'] else 'FAIL'}")
    (args.out / "fits.json").write_text(json.dumps(rows, indent=2, default=str) + "\n")
    with open(args.out / "series.dat", "w") as fh:
        fh.write("# t m p norm\n")
        for (m, p), s in exp.series.items():
            for t, v in zip(s.times, s.values):
                fh.write(f"{t:.17g} {m:g} {p:g} {v:.17g}\n")
    print(f"{time.perf_counter() - t0:.1f} s, results in {args.out}")


if __name__ == "__main__":
    main()
