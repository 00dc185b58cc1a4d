"""Sparkling splittings measured on an actual vector field.

The Bogdanov-Takens normal form x' = y, y' = b1 + b2*x + x^2 + x*y has a
saddle loop along a curve b1 ~ -(6/25) b2^2.  Run in reversed time at b2 = -0.5
the loop attracts from the inside with characteristic number ~2.02.  We locate
the loop parameter by bisection on the separatrix splitting, then find the
parameters at which a marked point escapes after exactly n turns, and compare
with the one-dimensional return-map model.

Double precision limits the flow measurements to n <= 5 or so; the first few
sheets are still far from the asymptotic regime, which the output shows.
"""
import math
import time

from polycycle.asymptotics import linear_fit
from polycycle.flow import bt_family, find_homoclinic, fit_map_model, measure_sparkling_flow, predict_sparkling


def main():
    t0 = time.perf_counter()
    fam = bt_family(-0.5)
    hom = find_homoclinic(fam, (-0.075, -0.05), tol=1e-13)
    lam = fam.saddle(hom).nu
    print(f"loop at b1 = {hom:.12f} (classical estimate {-6 / 25 * 0.25:.4f}); "
          f"splitting there {fam.splitting(hom, 1e-13):.1e}; lambda = {lam:.5f}")
    eps = {}
    for n in range(2, 6):
        m = measure_sparkling_flow(fam, hom, 0.1, n)
        eps[n] = m.eps
        print(f"  n={n}: b1 = {m.param:.14f}, eps = {m.eps:.4e}")
    ns = sorted(eps)
    lnln = [math.log(-math.log(eps[n])) for n in ns]
    print("successive differences of ln(-ln eps_n):",
          ", ".join(f"{b - a:.3f}" for a, b in zip(lnln, lnln[1:])), f"(ln lambda = {math.log(lam):.3f})")
    print(f"OLS slope {linear_fit(ns, lnln).slope:.4f}")
    for pair in ((2, 3), (3, 4)):
        g = fit_map_model({n: eps[n] for n in pair}, lam=lam)
        pred = predict_sparkling(g, [n for n in ns if n > pair[1]])
        errs = ", ".join(f"eps_{n} {pred[n] / eps[n] - 1:+.1%}" for n in pred)
        print(f"map fitted on eps_{pair[0]}, eps_{pair[1]} (c = {float(g.c):.3f}, p0 = {float(g.p0):.4f}) predicts {errs}")
    g = fit_map_model(eps)
    print(f"free-exponent fit over all sheets: lambda = {float(g.lam):.4f} ({float(g.lam) / lam - 1:+.1%})")
    print(f"{time.perf_counter() - t0:.1f} s")


if __name__ == "__main__":
    main()
