"""KS distance of the closest-reach Monte Carlo against its closed-form CDF, over sample size and step.

    python scripts/mc_convergence.py --ns 500,2000,8000 --dts 1e-2,1e-3,1e-4
"""

import argparse

from deepwh import StableParams
from deepwh import stable_sim as sim
from deepwh import verify as ver


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=0.6)
    ap.add_argument("--rho", type=float, default=0.5)
    ap.add_argument("--ns", default="500,2000,8000")
    ap.add_argument("--dts", default="1e-2,1e-3,1e-4")
    ap.add_argument("--seed", type=int, default=3)
    args = ap.parse_args()
    p = StableParams(args.alpha, args.rho)
    print("n,dt,ks,sampling_scale")
    for n in (int(v) for v in args.ns.split(",")):
        for dt in (float(v) for v in args.dts.split(",")):
            ss = sim.closest_reach_mc(1.0, p, sim.McConfig(n_paths=n, dt=dt, seed=args.seed))
            ks = ver.ks_statistic(ss.samples, ver.exact_cdf("closest", p, 1.0, ss.samples))
            # the KS distance of an exact sample is of order 0.87 / sqrt(n)
            print(f"{n},{dt:g},{ks:.4f},{0.87 / ss.samples.size ** 0.5:.4f}")


if __name__ == "__main__":
    main()
