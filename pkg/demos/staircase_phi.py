"""Recovering the modulus phi = -ln rho / ln lam of a glasses polycycle.

Along the synchronizing curve both loops of the glasses break at once, with
delta ~ eps**(lam*rho).  Counting the turns n on the left loop and m on the
right loop at each point gives a staircase whose slope is phi.  Because the
count is a topological invariant, phi is an invariant of the family.
"""
import math

from _common import out_path

from polycycle.models import PolycycleModel, estimate_phi, phi, staircase, staircase_eps
from polycycle.svg import Series, line_plot

MODELS = [("glasses", 2.0, 0.5), ("glasses", 2.0, 0.7), ("glasses", 1.5, 0.6), ("ears", 2.0, 0.7)]


def main():
    series = []
    for variant, lam, rho in MODELS:
        model = PolycycleModel.build(variant, lam, rho)
        ln_lam = math.log(lam)
        pts = staircase(model, staircase_eps(19 * ln_lam, 62 * ln_lam, 300))
        est, res = estimate_phi(pts, (20, 60))
        print(f"{variant:8s} lam={lam}, rho={rho}: phi = {phi(lam, rho):.5f}, estimate {est:.5f} +- {res:.3f}")
        window = [p for p in pts if 20 <= p.n_left <= 60]
        series.append(Series(f"{variant} lam={lam} rho={rho}", [p.m_right for p in window],
                             [p.n_left for p in window], markers=True))
    path = out_path("staircase_phi.svg")
    path.write_text(line_plot(series, "turn counts along the synchronizing curve", "m (right)", "n (left)"))
    print(f"plot written to {path}")


if __name__ == "__main__":
    main()
