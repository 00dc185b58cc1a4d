"""Command-line front end.

Every command takes ``--config FILE.json`` (keys are flag names without the
leading dashes), ``--bits`` and ``--threads``.  Values given as flags win over
the config file, which wins over built-in defaults.  Outputs go to the paths
named by ``--out``/``--json``/``--svg``; ``-`` means stdout.

Exit codes: 0 success, 1 numerical failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import contextlib
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import asymptotics, svg
from .dulac import LoopReturnMap, sparkling_table
from .errors import PolycycleError
from .models import (
    PolycycleModel,
    bifurcation_diagram,
    compare_families,
    estimate_phi,
    staircase,
    staircase_eps,
    staircase_to_csv,
)
from .precision import default_bits

__all__ = ["main", "build_parser"]


class UsageError(Exception):
    pass


class NumericalFailure(Exception):
    """Outputs were written but the run is incomplete (e.g. a truncated table)."""


# ---------------------------------------------------------------- plumbing

def _add(p, flag, default=None, required=False, **kw):
    """Register a flag whose default is resolved after the config file is read."""
    dest = flag.lstrip("-").replace("-", "_")
    kw.setdefault("help", "")
    if default is not None and "%(default)" not in kw["help"]:
        kw["help"] = (kw["help"] + f" (default {default!r})").strip()
    p.add_argument(flag, dest=dest, default=None, **kw)
    p._resolved[dest] = (flag, default, required)


def _subparser(sub, name, help_):
    p = sub.add_parser(name, help=help_, description=help_)
    p._resolved = {}
    p.add_argument("--config", help="JSON file with flag values (flags override it)")
    _add(p, "--bits", type=int, help="mantissa bits (default from POLYCYCLE_BITS, else 256)")
    _add(p, "--threads", default=1, type=int, help="worker processes")
    p.set_defaults(_parser=p)
    return p


def _resolve(args) -> argparse.Namespace:
    p = args._parser
    config = {}
    if args.config:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(raw, dict):
            raise UsageError("config file must hold a JSON object")
        config = {k.lstrip("-").replace("-", "_"): v for k, v in raw.items()}
        unknown = sorted(set(config) - set(p._resolved))
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    for dest, (flag, default, required) in p._resolved.items():
        if getattr(args, dest) is None:
            setattr(args, dest, config.get(dest, default))
        if required and getattr(args, dest) is None:
            raise UsageError(f"the following arguments are required: {flag}")
    if args.bits is None:
        args.bits = default_bits()
    if args.bits < 53:
        raise UsageError("--bits must be at least 53")
    if args.threads < 1:
        raise UsageError("--threads must be at least 1")
    return args


@contextlib.contextmanager
def _mapper(threads: int):
    # the library is handed a mapper even for one thread so that every
    # thread count takes the same task decomposition
    if threads == 1:
        yield map
        return
    with ProcessPoolExecutor(threads) as pool:
        yield pool.map


def _write(path, text: str):
    if path is None:
        return
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _json_target(args):
    # the JSON report goes to stdout unless the CSV already does
    if args.json is not None:
        return args.json
    return "-" if args.out != "-" else None


def _finite(x):
    return x if x is None or math.isfinite(x) else None


# ---------------------------------------------------------------- sparkling

def _add_loop_flags(p, suffix="", required=False):
    _add(p, f"--lambda{suffix}", type=float, required=required, help="characteristic number (> 1)")
    _add(p, f"--c{suffix}", default=1.0, type=float, help="Dulac coefficient")
    _add(p, f"--p0{suffix}", default=0.3, type=float, help="marked point on the section")
    _add(p, f"--a{suffix}", default=0.0, type=float, help="higher-order perturbation coefficient")
    _add(p, f"--y-max{suffix}", default=1.0, type=float, help="section half-width")


def _loop(args, suffix=""):
    g = lambda k: getattr(args, k + suffix)  # noqa: E731
    return LoopReturnMap(g("lambda"), g("c"), 0.0, g("p0"), g("y_max"), g("a"))


def cmd_sparkling(args):
    g = _loop(args)
    with _mapper(args.threads) as mapper:
        table = sparkling_table(g, args.n_max, tol=args.tol, bits=args.bits, mapper=mapper)
    _write(args.out, table.to_csv())
    n = len(table)
    if args.fit_window is not None:
        lo, hi = args.fit_window
    else:
        lo, hi = max(1, args.n_max // 4), args.n_max
    idx = [i for i, k in enumerate(table.indices) if lo <= k <= hi]
    target = args.fit_out
    if len(idx) >= 3:
        ys = [float(v) for v in table.ln_neg_ln()]
        if not all(math.isfinite(ys[i]) for i in idx):
            raise NumericalFailure("splittings >= 1 inside the fit window: ln(-ln eps) undefined")
        fit = asymptotics.linear_fit(table.indices, ys, (idx[0], idx[-1] + 1))
        fit = asymptotics.FitResult(fit.slope, fit.intercept, fit.residual,
                                    (table.indices[idx[0]], table.indices[idx[-1]]))
        if target is None and args.out != "-":
            target = "-"
        _write(target, fit.to_json() + "\n")
    elif target is not None:
        print(f"warning: {len(idx)} rows in the fit window, no fit written", file=sys.stderr)
    if table.truncated:
        raise NumericalFailure(f"table truncated after {n} rows: {table.reason}")


# ---------------------------------------------------------------- staircase

def _add_model_flags(p, variant=True):
    if variant:
        _add(p, "--variant", default="glasses", choices=("glasses", "ears"), help="polycycle type")
    _add(p, "--lambda", default=2.0, type=float, help="left characteristic number")
    _add(p, "--rho", default=0.5, type=float, help="right characteristic number (< 1)")
    _add(p, "--c-left", default=1.0, type=float)
    _add(p, "--c-right", default=1.0, type=float, help="reversed-time coefficient of the right loop")
    _add(p, "--c-b", default=1.0, type=float, help="bridge coefficient")
    _add(p, "--p0", default=0.3, type=float)
    _add(p, "--q0", default=0.3, type=float)
    _add(p, "--sigma", default=0.0, type=float, help="bridge splitting (glasses only)")


def _model(args, variant="glasses"):
    return PolycycleModel.build(
        getattr(args, "variant", variant), args.__dict__["lambda"], args.rho,
        args.c_left, args.c_right, args.c_b, args.p0, args.q0, 1.0, args.sigma,
        tuple(getattr(args, "eta", None) or ()),
    )


def cmd_staircase(args):
    model = _model(args)
    ln_lam = math.log(model.lam)
    if not 1 <= args.n_lo < args.n_hi:
        raise UsageError("need 1 <= --n-lo < --n-hi")
    # ln(-ln eps) ~ n ln(lam): cover one sheet beyond each end of the window
    eps = staircase_eps((args.n_lo - 1) * ln_lam, (args.n_hi + 2) * ln_lam, args.points, args.bits)
    with _mapper(args.threads) as mapper:
        pts = staircase(model, eps, cap=args.cap, bits=args.bits, mapper=mapper)
    _write(args.out, staircase_to_csv(pts))
    window = (args.n_lo, args.n_hi)
    phi_hat, resid = estimate_phi(pts, window)
    sel = [p for p in pts if window[0] <= p.n_left <= window[1]]
    ms = np.array([p.m_right for p in sel], dtype=float)
    ns = np.array([p.n_left for p in sel], dtype=float)
    intercept = float(ns.mean() - phi_hat * ms.mean())
    report = {
        "variant": model.variant,
        "lambda": model.lam,
        "rho": model.rho,
        "phi": model.phi,
        "phi_hat": phi_hat,
        "residual": resid,
        "intercept": intercept,
        "window": list(window),
        "points": len(pts),
        "points_in_window": len(sel),
        "requested_points": args.points,
    }
    _write(_json_target(args), _dumps(report))
    if args.svg:
        mm = np.array([min(ms), max(ms)])
        text = svg.line_plot(
            [svg.Series("staircase (m, n)", ms, ns, markers=True),
             svg.Series(f"fit slope {phi_hat:.4f}", mm, phi_hat * mm + intercept, dashed=True)],
            title=f"{model.variant}: turn counts along the synchronizing curve",
            xlabel="m (right turns)", ylabel="n (left turns)")
        _write(args.svg, text)
    if len(pts) < args.points:
        print(f"warning: staircase stopped after {len(pts)} of {args.points} points", file=sys.stderr)


# ---------------------------------------------------------------- compare

def cmd_compare(args):
    A = _loop(args)
    B = _loop(args, "_tilde")
    with _mapper(args.threads) as mapper:
        cmp = compare_families(A, B, (args.n_lo, args.n_hi), args.index_shift, args.bits, mapper)
    _write(args.out, cmp.to_csv())
    v = cmp.verdicts()
    v["n_range"] = [args.n_lo, args.n_hi]
    v["lambda"], v["lambda_tilde"] = A.lam, B.lam
    v = {k: _finite(x) if isinstance(x, float) else x for k, x in v.items()}
    _write(_json_target(args), _dumps(v))


# ---------------------------------------------------------------- bifdiag

_STYLE = {"left": ("#1f77b4", False), "right": ("#d62728", False), "sync": ("#000000", True)}


def cmd_bifdiag(args):
    model = _model(args)
    families = tuple(f.strip() for f in args.families.split(",") if f.strip())
    unknown = set(families) - {"left", "right", "sync"}
    if unknown or not families:
        raise UsageError(f"--families takes a subset of left,right,sync, got {args.families!r}")
    with _mapper(args.threads) as mapper:
        cs = bifurcation_diagram(model, args.n_max, args.m_max, samples=args.samples,
                                 families=families, bits=args.bits, mapper=mapper)
    _write(args.out, cs.to_json() + "\n")
    if args.svg:
        series = []
        for c in cs.curves:
            color, dashed = _STYLE[c.family]
            name = "E (sync)" if c.family == "sync" else f"{c.family} {c.index}"
            xs, ys = zip(*c.points)
            series.append(svg.Series(name, xs, ys, color=color, dashed=dashed))
        _write(args.svg, svg.line_plot(series, title="glasses bifurcation diagram",
                                       xlabel="eps", ylabel="delta", logx=True, logy=True))


# ---------------------------------------------------------------- flow

def _bt_saddle_seed(beta1, beta2):
    disc = beta2 * beta2 - 4 * beta1
    if disc < 0:
        raise UsageError("no equilibria for these beta values")
    return ((-beta2 + math.sqrt(disc)) / 2, 0.0)


def cmd_flow_saddle(args):
    from .flow import bogdanov_takens, find_saddle, hamiltonian_cubic

    if args.family == "bt":
        if args.beta1 is None or args.beta2 is None:
            raise UsageError("--family bt needs --beta1 and --beta2")
        fld = bogdanov_takens(args.beta1, args.beta2)
        seed = args.seed or _bt_saddle_seed(args.beta1, args.beta2)
    else:
        fld = hamiltonian_cubic(args.nu)
        seed = args.seed or (0.0, 0.0)
    if args.reversed:
        fld = fld.reversed()
    s = find_saddle(fld, seed, tol=args.tol)
    d = s.to_dict()
    d["family"], d["reversed"] = args.family, bool(args.reversed)
    d["characteristic_number"] = d["nu"]
    _write(args.json or "-", _dumps(d))


def _family(args):
    from .flow import bt_family, cubic_family

    if args.family == "bt":
        return bt_family(args.beta2), "beta1"
    return cubic_family(), "nu"


def _bracket(args):
    if args.bracket is not None:
        return tuple(args.bracket)
    if args.family == "bt":
        s2 = args.beta2 * args.beta2
        return (-0.3 * s2, -0.2 * s2)
    return (-0.01, 0.01)


def cmd_flow_homoclinic(args):
    from .flow import trace_separatrix

    fam, pname = _family(args)
    hom = _find_hom(fam, args)
    fld = fam.field(hom)
    sad = fam.saddle(hom)
    eps = fam.splitting(hom, args.int_tol)
    report = {"family": fam.name, pname: hom, "splitting": eps, "tol": args.tol,
              "bracket": list(_bracket(args)), "saddle": sad.to_dict(),
              "section": fam.section.to_dict()}
    if args.family == "bt":
        report["beta2"] = args.beta2
    if args.trajectory or args.crossings:
        tr = trace_separatrix(fld, sad, fam.unstable, sections=[fam.section], t_max=fam.t_max,
                              tol=args.int_tol, bbox=fam.bbox, stop=lambda c: True)
        _write(args.trajectory, tr.to_csv())
        _write(args.crossings, tr.crossings_csv())
    _write(args.json or "-", _dumps(report))


def _find_hom(fam, args):
    from .flow import find_homoclinic

    return find_homoclinic(fam, _bracket(args), tol=args.tol, int_tol=args.int_tol)


def _measure_task(job):
    from .flow import measure_sparkling_flow

    fam, hom, p0, n, tol = job
    try:
        return measure_sparkling_flow(fam, hom, p0, n, tol)
    except PolycycleError as exc:
        return exc


def cmd_flow_sparkling(args):
    from .flow import fit_map_model, predict_sparkling

    fam, pname = _family(args)
    hom = _find_hom(fam, args)
    sad = fam.saddle(hom)
    lam = 1.0 / sad.nu if sad.nu < 1 else sad.nu
    ns = list(range(args.n_lo, args.n_hi + 1))
    with _mapper(args.threads) as mapper:
        res = list(mapper(_measure_task, [(fam, hom, args.p0, n, args.int_tol) for n in ns]))
    rows, failures = [], {}
    for n, r in zip(ns, res):
        if isinstance(r, PolycycleError):
            failures[n] = f"{type(r).__name__}: {r}"
        else:
            rows.append(r)
    lines = [f"n,{pname},eps,offset"]
    lines += [f"{r.n},{r.param!r},{r.eps!r},{r.offset!r}" for r in rows]
    _write(args.out, "\n".join(lines) + "\n")
    measured = {r.n: r.eps for r in rows}
    report = {"family": fam.name, pname: hom, "p0": args.p0, "lambda": lam,
              "ln_lambda": math.log(lam), "saddle": sad.to_dict(),
              "measured": {str(k): v for k, v in measured.items()},
              "failures": {str(k): v for k, v in failures.items()}}
    if len(rows) >= 3:
        xs = [r.n for r in rows]
        ys = [math.log(-math.log(r.eps)) for r in rows]
        fit = asymptotics.linear_fit(xs, ys)
        report["slope"] = fit.slope
        report["slope_rel_error"] = fit.slope / math.log(lam) - 1
        try:
            free = fit_map_model(measured)
            report["free_lambda"] = free.lam
            report["free_lambda_rel_error"] = free.lam / lam - 1
        except PolycycleError as exc:
            report["free_lambda_error"] = str(exc)
    fit_ns = [n for n in (args.fit_n or []) if n in measured]
    if len(fit_ns) >= 2:
        g = fit_map_model({n: measured[n] for n in fit_ns}, lam=lam)
        rest = [n for n in measured if n not in fit_ns]
        pred = predict_sparkling(g, rest)
        report["map_fit"] = {"fit_n": fit_ns, "c": g.c, "p0": g.p0,
                             "predicted": {str(n): pred[n] for n in rest},
                             "rel_error": {str(n): pred[n] / measured[n] - 1 for n in rest}}
    _write(_json_target(args), _dumps(report))
    if failures:
        raise NumericalFailure(f"measurement failed for n in {sorted(failures)}")


def cmd_flow_glued_check(args):
    from .flow import GluedGlassesSpec, build_glued_glasses, find_saddle, glued_splittings

    try:
        with open(args.spec) as fh:
            spec = GluedGlassesSpec.from_json(fh.read())
    except (OSError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read glued spec {args.spec}: {exc}") from exc
    gg = build_glued_glasses(spec)
    meas = glued_splittings(gg, tol=args.tol)
    target = {"l": spec.eps, "b": spec.sigma, "r": spec.delta}
    err = {k: meas[k] - target[k] for k in meas}
    sL, sR = find_saddle(gg.field, gg.L), find_saddle(gg.field, gg.R)
    report = {
        "splittings": meas,
        "offsets": target,
        "errors": err,
        "max_error": max(abs(e) for e in err.values()),
        "threshold": args.threshold,
        "closed": all(abs(e) < args.threshold for e in err.values()),
        "saddles": {"L": sL.to_dict(), "R": sR.to_dict()},
        "eigenvalue_errors": {
            "L": [sL.eigenvalues[0] - 1.0, sL.eigenvalues[1] + spec.lam],
            "R": [sR.eigenvalues[0] - spec.rho, sR.eigenvalues[1] + 1.0],
        },
    }
    _write(args.json or "-", _dumps(report))
    if not report["closed"]:
        raise NumericalFailure(f"glued splittings miss their offsets by {report['max_error']:.3g}")


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polycycle", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = _subparser(sub, "sparkling", "sparkling splittings of one loop map and the slope fit")
    _add_loop_flags(p, required=True)
    _add(p, "--n-max", default=40, type=int, help="number of sheets")
    _add(p, "--tol", type=float, help="relative solver tolerance (default from --bits)")
    _add(p, "--fit-window", type=int, nargs=2, metavar=("LO", "HI"),
         help="inclusive n range of the slope fit (default n_max/4..n_max)")
    _add(p, "--out", default="-", help="table CSV")
    _add(p, "--fit-out", help="FitResult JSON (stdout when --out is a file)")
    p.set_defaults(func=cmd_sparkling)

    p = _subparser(sub, "staircase", "turn counts along the synchronizing curve and the phi estimate")
    _add_model_flags(p)
    _add(p, "--eta", type=float, nargs="*", help="moduli beyond phi (inert)")
    _add(p, "--n-lo", default=20, type=int, help="fit window start (left turns)")
    _add(p, "--n-hi", default=60, type=int, help="fit window end (left turns)")
    _add(p, "--points", default=400, type=int)
    _add(p, "--cap", default=10000, type=int, help="turn-count cap")
    _add(p, "--out", default="-", help="staircase CSV")
    _add(p, "--json", help="phi report JSON")
    _add(p, "--svg", help="plot of the staircase with its fitted line")
    p.set_defaults(func=cmd_staircase)

    p = _subparser(sub, "compare", "index-matched comparison of two loop families")
    _add_loop_flags(p, required=True)
    _add_loop_flags(p, "-tilde", required=True)
    _add(p, "--n-lo", default=20, type=int)
    _add(p, "--n-hi", default=40, type=int)
    _add(p, "--index-shift", default=0, type=int)
    _add(p, "--out", default="-", help="comparison CSV")
    _add(p, "--json", help="verdicts JSON")
    p.set_defaults(func=cmd_compare)

    p = _subparser(sub, "bifdiag", "glasses bifurcation diagram in the (eps, delta) plane")
    _add_model_flags(p, variant=False)
    _add(p, "--n-max", default=4, type=int, help="left sheets")
    _add(p, "--m-max", default=4, type=int, help="right sheets")
    _add(p, "--samples", default=64, type=int)
    _add(p, "--families", default="left,right,sync", help="comma-separated subset of left,right,sync")
    _add(p, "--out", default="-", help="curve-set JSON")
    _add(p, "--svg", help="log-log plot")
    p.set_defaults(func=cmd_bifdiag)

    fl = sub.add_parser("flow", help="planar ODE validation runs")
    fsub = fl.add_subparsers(dest="flow_command", required=True)

    p = _subparser(fsub, "saddle", "locate a saddle and report its eigen-data")
    _add(p, "--family", default="bt", choices=("bt", "cubic"))
    _add(p, "--beta1", type=float)
    _add(p, "--beta2", type=float)
    _add(p, "--nu", default=0.0, type=float, help="dissipation of the cubic family")
    _add(p, "--seed", type=float, nargs=2, metavar=("X", "Y"))
    _add(p, "--reversed", action="store_const", const=True, help="reverse time")
    _add(p, "--tol", default=1e-12, type=float)
    _add(p, "--json", default="-")
    p.set_defaults(func=cmd_flow_saddle)

    def loop_flags(p, tol):
        _add(p, "--family", default="bt", choices=("bt", "cubic"))
        _add(p, "--beta2", default=-0.5, type=float)
        _add(p, "--bracket", type=float, nargs=2, metavar=("LO", "HI"))
        _add(p, "--tol", default=tol, type=float, help="target |splitting| at the homoclinic parameter")
        _add(p, "--int-tol", default=1e-13, type=float, help="integrator relative tolerance")

    p = _subparser(fsub, "homoclinic", "locate the homoclinic parameter of a loop family")
    loop_flags(p, 1e-10)
    _add(p, "--trajectory", help="CSV of the unstable separatrix up to the section")
    _add(p, "--crossings", help="CSV of its section crossings")
    _add(p, "--json", default="-")
    p.set_defaults(func=cmd_flow_homoclinic)

    p = _subparser(fsub, "sparkling", "flow-measured sparkling splittings and the map-model check")
    # the deepest sheets sit near 1e-12, so the loop must be located below that
    loop_flags(p, 1e-13)
    _add(p, "--p0", default=0.1, type=float, help="marked point coordinate on the section")
    _add(p, "--n-lo", default=2, type=int)
    _add(p, "--n-hi", default=5, type=int)
    _add(p, "--fit-n", default=[2, 3], type=int, nargs="+", help="sheets used to fit (c, p0)")
    _add(p, "--out", default="-", help="measurement CSV")
    _add(p, "--json", help="comparison report JSON")
    p.set_defaults(func=cmd_flow_sparkling)

    p = _subparser(fsub, "glued-check", "build a glued glasses field and check its splittings")
    _add(p, "--spec", required=True, help="glued-field JSON")
    _add(p, "--tol", default=1e-10, type=float)
    _add(p, "--threshold", default=1e-6, type=float, help="allowed |measured - offset|")
    _add(p, "--json", default="-")
    p.set_defaults(func=cmd_flow_glued_check)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)  # exits 2 on malformed flags
    try:
        _resolve(args)
        args.func(args)
    except UsageError as exc:
        args._parser.print_usage(sys.stderr)
        print(f"{args._parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"polycycle: {exc}", file=sys.stderr)
        return 1
    except PolycycleError as exc:
        print(f"polycycle: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
