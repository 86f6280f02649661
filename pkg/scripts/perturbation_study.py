"""Stability of signed counts under the choice of perturbation.

    python scripts/perturbation_study.py [--trials 20]

For each shipped counting chart, draws ``trials`` perturbation seeds at
several sizes and tabulates the distinct certified values and retry counts.
"""
import argparse
from collections import Counter

from kuranishi import data_path
from kuranishi.schemas import validate_input
from kuranishi.vfc import CountError, perturb_and_count

CHARTS = ("chart_x.json", "chart_x2.json", "chart_x3_minus_x.json", "chart_2d.json")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--eps", type=float, nargs="+", default=[1e-2, 1e-3, 1e-4, 1e-6])
    args = ap.parse_args()
    print(f"{'chart':<24} {'eps':>8}  values            retries  failures")
    for name in CHARTS:
        chart = validate_input(data_path(name))
        for eps in args.eps:
            values, retries, failures = Counter(), 0, 0
            for seed in range(args.trials):
                try:
                    sc = perturb_and_count(chart, eps=eps, seed=seed)
                except CountError:
                    failures += 1
                    continue
                values[sc.value] += 1
                retries += sc.attempts - 1
            print(f"{name:<24} {eps:>8.0e}  {dict(sorted(values.items()))!s:<17} {retries:>7}  {failures:>8}")


if __name__ == "__main__":
    main()
