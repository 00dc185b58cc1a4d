"""A glasses polycycle built by hand from linear saddles and flow boxes.

Two linear saddles with eigenvalues (1, -lam) and (rho, -1) are joined by three
channels: one loop around each saddle and a bridge between them.  A transverse
bump on each channel shifts its orbits by a chosen offset, so the three
separatrix splittings can be dialled in directly.  With all offsets zero the
separatrix graph closes.
"""
import numpy as np

from _common import out_path

from polycycle.flow import build_glued_glasses, find_saddle, glued_splittings, trace_separatrix
from polycycle.svg import Series, line_plot

SPEC = {"lambda": 2.0, "rho": 0.6, "eps": 0.0, "sigma": 0.0, "delta": 0.0}


def main():
    gg = build_glued_glasses(SPEC)
    for name, c in gg.saddle_centers().items():
        s = find_saddle(gg.field, c)
        print(f"saddle {name} at {s.position}: eigenvalues {s.eigenvalues}, nu = {s.nu:.6g}")
    print("closed graph, splittings:", {k: f"{v:.1e}" for k, v in glued_splittings(gg).items()})
    for name in ("eps", "sigma", "delta"):
        out = glued_splittings(build_glued_glasses({**SPEC, name: 1e-3}))
        print(f"{name} = 1e-3 ->", {k: f"{v:+.6f}" for k, v in out.items()})

    series = []
    saddles = {"L": find_saddle(gg.field, gg.L), "R": find_saddle(gg.field, gg.R)}
    for key, (su, bu, _, _) in gg.branches.items():
        tr = trace_separatrix(gg.field, saddles[su], bu, t_max=6.0)
        xy = np.asarray(tr.xy)
        series.append(Series(f"{key}: {su} {bu}", xy[:, 0], xy[:, 1]))
    path = out_path("glued_glasses.svg")
    path.write_text(line_plot(series, "unstable separatrices of the glued field", "x", "y"))
    print(f"plot written to {path}")


if __name__ == "__main__":
    main()
