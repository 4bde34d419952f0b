"""Print one simulated path next to its Lamperti-Kiu coordinates (xi, J, s) and the round trip error.

    python scripts/lamperti_kiu_table.py --alpha 0.7 --rho 0.4 --x0 -2 --rows 15
"""

import argparse

import numpy as np

from deepwh import StableParams
from deepwh import stable_sim as sim


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=0.7)
    ap.add_argument("--rho", type=float, default=0.4)
    ap.add_argument("--x0", type=float, default=-2.0)
    ap.add_argument("--dt", type=float, default=1e-3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--rows", type=int, default=15)
    args = ap.parse_args()
    p = StableParams(args.alpha, args.rho)
    cfg = sim.McConfig(n_paths=1, dt=args.dt, seed=args.seed, workers=1)
    path = sim.simulate_path(args.x0, p, cfg)
    m = sim.lamperti_kiu(path, p)
    back = sim.lamperti_kiu_inverse(m, p)
    print(f"{'t':>12} {'X_t':>12} {'s':>12} {'xi_s':>10} {'J_s':>4}")
    for k in np.unique(np.linspace(0, path.times.size - 1, args.rows).astype(int)):
        print(f"{path.times[k]:12.5g} {path.values[k]:12.5g} {m.s_times[k]:12.5g} {m.xi[k]:10.4f} {m.j[k]:4d}")
    err = np.max(np.abs(back.values - path.values) / np.abs(path.values))
    print(f"{path.times.size} grid points, stop reason {path.stop_reason}, round trip max rel error {err:.2e}")


if __name__ == "__main__":
    main()
