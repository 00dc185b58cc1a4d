"""Matching sparkling sequences of two loops with the same index.

If two families have characteristic numbers lam and lam~, the ratio
ln(-ln eps~_n) / ln(-ln eps_n) tends to ln lam~ / ln lam.  When lam = lam~ the
normalized differences stay bounded, and the Hölder profile
ln eps~_n / ln eps_n settles to a constant; when lam != lam~ it blows up
geometrically, so no Hölder-continuous reparametrization can match the two
families.
"""
import math

from polycycle.models import compare_families
from polycycle.dulac import LoopReturnMap


def show(A, B, label):
    cmp = compare_families(A, B, (20, 40))
    value, half = cmp.ratio_limit()
    print(label)
    print(f"  ratio limit {value:.5f} +- {half:.1e} (target {cmp.target_ratio:.5f})")
    print(f"  differences: {cmp.difference_verdict()[0]}, Hölder profile: {cmp.holder_verdict()[0]} "
          f"(kappa_20 = {cmp.kappas[0]:.4g}, kappa_40 = {cmp.kappas[-1]:.4g})")


def main():
    base = LoopReturnMap(2.0, 1.0, 0.0, 0.3)
    show(base, LoopReturnMap(3.0, 1.0, 0.0, 0.3), "lam = 2 against lam~ = 3")
    show(base, LoopReturnMap(2.0, 0.5, 0.0, 0.1), "lam = lam~ = 2 with different c and p0")
    # the ratio tends to 1 only like 1/n: the constants c, p0 enter ln(-ln eps_n) additively
    # a shifted index only relabels the sheets: each difference moves by about one sheet
    other = LoopReturnMap(2.0, 0.5, 0.0, 0.1)
    d0 = compare_families(base, other, (20, 40)).differences
    d1 = compare_families(base, other, (20, 40), shift=1).differences
    moves = [b - a for a, b in zip(d0, d1)]
    print(f"index shift 1 moves the differences by {min(moves):.6f} .. {max(moves):.6f}")
    print(f"ln 3/ln 2 = {math.log(3) / math.log(2):.5f}")


if __name__ == "__main__":
    main()
