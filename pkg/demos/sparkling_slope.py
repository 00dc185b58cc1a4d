"""How fast do the sparkling splittings of a saddle loop shrink?

A broken loop with characteristic number lam has a discrete set of splittings
eps_1 > eps_2 > ... at which the orbit of a marked point hits the stable
separatrix after n turns.  They decay double-exponentially, and the clean way
to see the rate is ln(-ln eps_n), which grows like n*ln(lam).

This script tabulates eps_n for a few maps at 256 bits, fits the slope and
plots the sequences together.
"""
import math

from _common import out_path

from polycycle.asymptotics import linear_fit
from polycycle.dulac import LoopReturnMap, count_turns, sparkling_table
from polycycle.svg import Series, line_plot

MAPS = [(1.5, 1.0, 0.3), (2.0, 0.5, 0.1), (3.0, 2.0, 0.1)]
N = 40


def main():
    series = []
    for lam, c, p0 in MAPS:
        g = LoopReturnMap(lam, c, 0.0, p0)
        table = sparkling_table(g, N)
        ys = [float(v) for v in table.ln_neg_ln()]
        fit = linear_fit(table.indices, ys, (9, N))
        print(f"lam={lam}, c={c}, p0={p0}")
        print(f"  eps_1 = {float(table.eps(1)):.6g}, eps_5 = {float(table.eps(5)):.6g}, "
              f"eps_40 ~ 10^{float(table.eps(40).context.log10(table.eps(40))):.4g}")
        print(f"  slope of ln(-ln eps_n) over n = 10..40: {fit.slope:.6f} (ln lam = {math.log(lam):.6f})")
        # the table doubles as a lookup: the turn count of any eps is its bracket
        e = (table.eps(7) + table.eps(8)) / 2
        print(f"  eps halfway between eps_8 and eps_7 -> {count_turns(g.with_eps(e))} turns")
        series.append(Series(f"lam={lam}, c={c}, p0={p0}", table.indices, ys, markers=True))
    path = out_path("sparkling_slope.svg")
    path.write_text(line_plot(series, "ln(-ln eps_n) against n", "n", "ln(-ln eps_n)"))
    print(f"plot written to {path}")


if __name__ == "__main__":
    main()
