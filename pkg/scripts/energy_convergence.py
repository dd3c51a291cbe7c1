"""Energy-ledger drift of the nonlinear solver under step halving.

    python3 scripts/energy_convergence.py --n 32 --steps 1e-2 5e-3 2.5e-3
"""

import argparse
import time

import numpy as np

from rotns.grid import GridSpec
from rotns.initial_data import InitialDataSpec, generate_initial_data
from rotns.solver import IntegratorConfig, energy_audit, simulate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=32)
    ap.add_argument("--omega", type=float, default=1.0)
    ap.add_argument("--amplitude", type=float, default=0.5)
    ap.add_argument("--length-scale", type=float, default=0.7)
    ap.add_argument("--t-end", type=float, default=1.0)
    ap.add_argument("--scheme", default="etd2rk")
    ap.add_argument("--steps", type=float, nargs="+", default=[1e-2, 5e-3, 2.5e-3])
    args = ap.parse_args()

    g = GridSpec(args.n, 2 * np.pi)
    u0 = generate_initial_data(InitialDataSpec("gaussian-divfree", 0, args.amplitude, args.length_scale), g)
    prev = None
    for dt in args.steps:
        t0 = time.perf_counter()
        cfg = IntegratorConfig(args.scheme, dt, args.t_end, 10**9, (), keep_snapshots=False)
        drift = energy_audit(simulate(u0, args.omega, cfg).energy)
        order = "" if prev is None else f"  order {np.log2(prev[1] / drift) / np.log2(prev[0] / dt):.3f}"
        print(f"dt={dt:.3g}  max drift {drift:.3e}{order}  ({time.perf_counter() - t0:.1f} s)")
        prev = (dt, drift)


if __name__ == "__main__":
    main()
