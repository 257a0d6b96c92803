"""Best J2/J3 versus the number of chirped pulses per individual.

Runs the GA for N = 30, 40, 60 pulses on matched seeds and prints the best
ratio for each, alongside the free-evolution baseline.

    python3 scripts/lcp_trend.py [--seeds 0 1] [--generations 20] [--pop 32] [--workers 1]
"""
import argparse
import json

from lcpga.evolver import ControlProblem, GaConfig, evolve


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    ap.add_argument("--lcps", type=int, nargs="+", default=[30, 40, 60])
    ap.add_argument("--generations", type=int, default=20)
    ap.add_argument("--pop", type=int, default=32)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", help="optional JSON file for the results")
    args = ap.parse_args()

    problem = ControlProblem.build()
    baseline = problem.run(None).ratio_j2_j3
    print(f"free-evolution J2/J3 = {baseline:.4f}")
    results = []
    for seed in args.seeds:
        for n_lcp in args.lcps:
            cfg = GaConfig(n_lcp=n_lcp, pop_size=args.pop, n_generations=args.generations, seed=seed)
            best = evolve(cfg, problem, workers=args.workers).best()
            results.append({"seed": seed, "n_lcp": n_lcp, "fitness": best.fitness,
                            "j2": float(best.j_flux[1]), "j3": float(best.j_flux[2]),
                            "ratio_j2_j3": best.ratio_j2_j3})
            r = results[-1]
            print(f"seed {seed:3d}  N={n_lcp:3d}  fitness {r['fitness']:10.4f}  "
                  f"J2 {r['j2']:.4f}  J3 {r['j3']:.4f}  J2/J3 {r['ratio_j2_j3']:.4f} "
                  f"({r['ratio_j2_j3'] / baseline:.1f}x baseline)", flush=True)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"baseline_ratio": baseline, "runs": results}, fh, indent=2)


if __name__ == "__main__":
    main()
