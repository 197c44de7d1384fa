#!/usr/bin/env python3
"""Coverage experiment for the census estimator.

Runs the estimator at several tolerances over many seeds and reports how
often the estimate lands inside (1 +- epsilon) of the true census, which
the guarantees put above 3/4 conditioned on not failing.

Usage: python scripts/estimator_coverage.py [--runs 500]
"""

import argparse
from fractions import Fraction

from countgen.cfg import CnfGrammar, cfl_description, earley_count
from countgen.coins import FAIL, CoinSource
from countgen.describe import Bound, DnfFormula, dnf_description, estimate_census


def coverage(name, desc, n, truth, epsilons, runs):
    print(f"== {name} (true census {truth})")
    for eps in epsilons:
        hits = 0
        fails = 0
        for seed in range(runs):
            est = estimate_census(desc, n, eps, CoinSource(seed))
            if est is FAIL:
                fails += 1
            elif (1 - eps) * truth <= est <= (1 + eps) * truth:
                hits += 1
        usable = runs - fails
        print(
            f"   eps={eps}: coverage {hits}/{usable}"
            f" = {hits / max(1, usable):.3f}, failures {fails}"
        )


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--runs", type=int, default=500)
    args = parser.parse_args()
    epsilons = [Fraction(1, 2), Fraction(1, 4)]

    formula = DnfFormula(3, ((1,), (1, 2), (2, 3)))
    truth = sum(
        any(
            formula.satisfies(f"{bits:03b}"[::-1], j)
            for j in range(len(formula.clauses))
        )
        for bits in range(8)
    )
    coverage("DNF, 3 variables", dnf_description(formula), 3, truth, epsilons, args.runs)

    catalan = CnfGrammar(("S",), ("a",), "S", {"S": [("S", "S")]}, {"S": ["a"]})
    desc = cfl_description(catalan, Bound(const=14))
    truth = int(earley_count(catalan, "a" * 5) > 0)  # the slice has one word
    coverage("one-letter grammar slice, n=5", desc, 5, truth, epsilons, args.runs)


if __name__ == "__main__":
    main()
