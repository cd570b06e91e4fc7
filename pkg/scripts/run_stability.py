"""Anchor-set stability: the country-wise graph detected twice, once per anchor family.

    python3 scripts/run_stability.py [--seed 42]
"""

import argparse
import json

from globalness.experiments import stability_run


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()
    res = stability_run(args.seed)
    print(json.dumps(res["result"].to_dict(), indent=1))


if __name__ == "__main__":
    main()
