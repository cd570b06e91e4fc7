"""Country-wise synthetic run: five in-scope regions against five outside ones, three seeds.

    python3 scripts/run_countrywise.py [--seeds 42 43 44]
"""

import argparse
import time

from globalness.experiments import COUNTRYWISE_SEEDS, countrywise_summary


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, nargs="+", default=list(COUNTRYWISE_SEEDS))
    args = ap.parse_args()

    t0 = time.perf_counter()
    s = countrywise_summary(tuple(args.seeds))
    for seed, run in zip(args.seeds, s["runs"]):
        c, g = run["classification"], run["global"]
        print(f"seed {seed}: macroP={c['macro_precision']:.4f} macroR={c['macro_recall']:.4f} "
              f"globalP={g['precision']:.4f} globalR={g['recall']:.4f} flagged={g['flagged']}")
    print(f"mean: macroP={s['macro_precision']:.4f} macroR={s['macro_recall']:.4f} "
          f"globalP={s['global_precision']:.4f} globalR={s['global_recall']:.4f}")
    print(f"elapsed {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
