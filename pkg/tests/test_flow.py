import json
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from polycycle.errors import (
    BoundingBoxExit,
    ConvergenceError,
    DomainError,
    ExistenceError,
    GeometryError,
    NotASaddleError,
)
from polycycle.flow import (
    GluedGlassesSpec,
    PlanarField,
    Section,
    bogdanov_takens,
    bt_family,
    build_glued_glasses,
    cubic_energy,
    cubic_family,
    find_homoclinic,
    find_saddle,
    first_crossing,
    fit_map_model,
    glued_splittings,
    hamiltonian_cubic,
    integrate,
    linear_field,
    measure_sparkling_flow,
    rotation,
    splitting,
    trace_separatrix,
)
from polycycle.flow.field import fd_jacobian

TOL = 1e-10


# -- integration -----------------------------------------------------------------

def test_rotation_period():
    tr = integrate(rotation(), (1.0, 0.0), 2 * math.pi, TOL)
    assert np.hypot(*(tr.end - (1.0, 0.0))) < 10 * TOL


def test_linear_closed_form():
    tr = integrate(linear_field(1, 0, 0, -2), (1.0, 1.0), 1.0, TOL)
    assert tr.end[0] == pytest.approx(math.e, rel=10 * TOL)
    assert tr.end[1] == pytest.approx(math.exp(-2), rel=10 * TOL)


def test_reversed_time_linear():
    tr = integrate(linear_field(1, 0, 0, -2), (1.0, 1.0), -1.0, TOL)
    assert tr.end[0] == pytest.approx(math.exp(-1), rel=10 * TOL)
    assert tr.end[1] == pytest.approx(math.exp(2), rel=10 * TOL)
    assert tr.t[-1] == -1.0


def test_crossing_convergence_in_tol():
    sec = Section((0.75, 0.0), (0.0, 1.0), 1.0)
    fld = hamiltonian_cubic()
    runs = [integrate(fld, (0.5, 0.0), 30.0, tol, [sec]).crossings for tol in (TOL, TOL / 2)]
    assert len(runs[0]) == len(runs[1]) >= 4
    for a, b in zip(*runs):
        assert a.direction == b.direction
        assert abs(a.coordinate - b.coordinate) < 5 * TOL
        assert abs(a.coordinate) <= sec.halfwidth


def test_crossing_location_on_circle():
    # unit circle hits the section x = 0.6 at y = +-0.8
    sec = Section((0.6, 0.0), (0.0, 1.0), 1.0)
    tr = integrate(rotation(), (1.0, 0.0), 2 * math.pi - 0.1, TOL, [sec])
    # normal of (0, 1) is (-1, 0): the leftward first crossing counts as positive
    assert [c.direction for c in tr.crossings] == [1, -1]
    assert tr.crossings[0].coordinate == pytest.approx(0.8, abs=10 * TOL)
    assert tr.crossings[1].coordinate == pytest.approx(-0.8, abs=10 * TOL)
    assert tr.crossings[0].time == pytest.approx(math.acos(0.6), abs=1e-8)


def test_energy_drift_over_one_period():
    # two crossings of the vertical line through the center close one period
    sec = Section((1.0, 0.0), (0.0, 1.0), 1.0)
    x0 = np.array([0.5, 0.0])
    hits = []
    tr = integrate(hamiltonian_cubic(), x0, 50.0, TOL, [sec], stop=lambda c: hits.append(c) or len(hits) == 2)
    assert tr.status == "stopped"
    assert abs(cubic_energy(tr.end) - cubic_energy(x0)) < 100 * TOL


@given(st.floats(0.05, 1.45), st.floats(-0.3, 0.3), st.floats(0.5, 8))
@settings(max_examples=25, deadline=None)
def test_time_reversal(x, y, t):
    # bounded orbits inside the loop
    assume(cubic_energy((x, y)) < -1e-3)
    fld = hamiltonian_cubic()
    fwd = integrate(fld, (x, y), t, TOL)
    back = integrate(fld, fwd.end, -t, TOL)
    assert np.hypot(*(back.end - (x, y))) < 100 * TOL * max(1.0, np.abs(fwd.xy).max())


@pytest.mark.parametrize("fld", [bogdanov_takens(-0.05, -0.5), hamiltonian_cubic(0.3), linear_field(1, 2, 3, 4)],
                         ids=["bt", "cubic", "linear"])
@given(st.floats(-2, 2), st.floats(-2, 2))
@settings(max_examples=50, deadline=None)
def test_jacobian_matches_differences(fld, x, y):
    J = fld.jac((x, y))
    F = fd_jacobian(fld.evaluator, (x, y), fld.params, 1e-6)
    assert np.abs(J - F).max() <= 1e-5 * max(1.0, np.abs(J).max())


def test_integrate_errors_and_bbox():
    with pytest.raises(DomainError):
        integrate(rotation(), (1, 0), 1.0, 0.0)
    with pytest.raises(BoundingBoxExit):
        integrate(linear_field(1, 0, 0, 1), (1, 1), 20.0, TOL, bbox=(-10, 10, -10, 10))
    tr = integrate(rotation(), (1, 0), 0.0, TOL)
    assert len(tr.t) == 1


def test_trajectory_dumps():
    sec = Section((0.0, 0.0), (1.0, 0.0), 2.0)
    tr = integrate(rotation(), (1.0, 0.0), 4.0, TOL, [sec])
    lines = tr.to_csv().splitlines()
    assert lines[0] == "t,x,y" and len(lines) == len(tr.t) + 1
    cl = tr.crossings_csv().splitlines()
    assert cl[0] == "t,coord,dir" and len(cl) == 2
    t, coord, d = cl[1].split(",")
    assert float(coord) == pytest.approx(-1.0, abs=1e-9) and d == "-1"


def test_section_transversality():
    # at (0, 1) the rotation moves along -x
    with pytest.raises(DomainError):
        Section((0.0, 1.0), (1.0, 0.0), 0.5).check_transversal(rotation())
    Section((0.0, 1.0), (0.0, 1.0), 0.5).check_transversal(rotation())
    with pytest.raises(DomainError):
        Section((0, 0), (1, 0), 0.0)


def test_crossings_deterministic():
    fld = hamiltonian_cubic(1e-3)
    sec = cubic_family().section
    a = integrate(fld, (1.4, 0.0), 60.0, TOL, [sec]).crossings
    b = integrate(fld, (1.4, 0.0), 60.0, TOL, [sec]).crossings
    assert a == b and len(a) > 0


# -- saddles and separatrices ----------------------------------------------------

def test_find_saddle_linear():
    s = find_saddle(linear_field(1, 0, 0, -2), (0.1, 0.1))
    assert s.position == (0.0, 0.0)
    assert s.nu == pytest.approx(2.0, abs=1e-14)
    assert s.eigenvalues[0] > 0 > s.eigenvalues[1]
    assert s.vector("unstable+") == pytest.approx([1, 0])
    assert s.vector("stable-") == pytest.approx([0, -1])


def test_find_saddle_cubic():
    s = find_saddle(hamiltonian_cubic(), (0.05, -0.03))
    assert np.hypot(*s.position) < 1e-12
    assert s.nu == pytest.approx(1.0, abs=1e-12)
    assert s.eigenvalues == pytest.approx((1.0, -1.0), abs=1e-12)


@pytest.mark.parametrize("b1,b2", [(-0.05, -0.5), (-0.1, 0.3), (-0.0565, -0.5)])
def test_find_saddle_bt(b1, b2):
    fld = bogdanov_takens(b1, b2)
    x = (-b2 + math.sqrt(b2 * b2 - 4 * b1)) / 2
    s = find_saddle(fld, (x + 0.01, 0.01))
    assert s.position[0] == pytest.approx(x, abs=1e-12)
    # the trace at the saddle equals its x coordinate, and nu = 1 only for zero trace
    mu_u, mu_s = s.eigenvalues
    assert mu_u + mu_s == pytest.approx(x, abs=1e-12)
    assert mu_u * mu_s == pytest.approx(-(b2 + 2 * x), abs=1e-12)
    assert s.nu != 1.0
    assert np.hypot(*fld(s.position)) < 1e-12


def test_find_saddle_errors():
    with pytest.raises(NotASaddleError):
        find_saddle(rotation(), (0.1, 0.0))
    with pytest.raises(NotASaddleError):
        find_saddle(linear_field(-1, 0, 0, -2), (0.1, 0.1))
    with pytest.raises(ConvergenceError):
        find_saddle(PlanarField(lambda p, q: (1.0 + p[0] ** 2, 0.0)), (0.0, 0.0), max_iter=10)


def test_separatrix_linear():
    fld = linear_field(1, 0, 0, -2)
    s = find_saddle(fld, (0.1, 0.1))
    sec = Section((1.0, 0.0), (0.0, 1.0), 0.5)
    c = first_crossing(fld, s, "unstable+", sec)
    assert abs(c.coordinate) < 1e-15
    c = first_crossing(fld, s, "stable+", Section((0.0, 1.0), (1.0, 0.0), 0.5))
    assert abs(c.coordinate) < 1e-15 and c.time < 0


def test_separatrix_cubic_level_set():
    fld = hamiltonian_cubic()
    s = find_saddle(fld, (0.1, 0.1))
    sec = Section((1.0, 0.0), (0.0, 1.0), 1.0)
    c = first_crossing(fld, s, "unstable+", sec)
    assert c.coordinate == pytest.approx(math.sqrt(1 / 3), abs=1e-6)
    apex = first_crossing(fld, s, "unstable+", cubic_family().section)
    assert abs(apex.coordinate) < 1e-6
    tr = trace_separatrix(fld, s, "unstable+", sections=[cubic_family().section], t_max=15.0)
    assert max(abs(cubic_energy(p)) for p in tr.xy) < 1e-6


def test_separatrix_seed_convergence():
    fld = bogdanov_takens(-0.05, -0.5).reversed()
    s = find_saddle(fld, (0.6, 0.0))
    sec = bt_family(-0.5).section
    for branch in ("unstable-", "stable-"):
        h = 1e-6
        a = first_crossing(fld, s, branch, sec, h=h, tol=1e-12)
        b = first_crossing(fld, s, branch, sec, h=h / 2, tol=1e-12)
        assert abs(a.coordinate - b.coordinate) < 10 * h


# -- splittings and homoclinic loops ------------------------------------------------

def test_cubic_loop_unbroken():
    fam = cubic_family()
    assert abs(fam.splitting(0.0)) < 1e-8
    fld = hamiltonian_cubic()
    s = find_saddle(fld, (0.1, 0.1))
    # a tilted section through the apex
    other = Section((1.5, 0.0), (-1.0, 0.4), 0.5)
    assert abs(splitting(fld, s, other, "unstable+", "stable+")) < 1e-8


@pytest.mark.parametrize("nu", [1e-3, -1e-3])
def test_melnikov_sign(nu):
    assert math.copysign(1, cubic_family().splitting(nu)) == math.copysign(1, nu)


def test_find_homoclinic_cubic():
    assert find_homoclinic(cubic_family(), (-0.1, 0.1), tol=1e-10) == 0.0
    with pytest.raises(ExistenceError):
        find_homoclinic(cubic_family(), (0.01, 0.1))


@pytest.fixture(scope="module")
def bt_loop():
    fam = bt_family(-0.5)
    hom = find_homoclinic(fam, (-0.075, -0.05), tol=1e-13)
    return fam, hom


def test_find_homoclinic_bt(bt_loop):
    fam, hom = bt_loop
    assert abs(fam.splitting(hom, 1e-13)) < 1e-8
    classical = -6 / 25 * 0.25
    assert 0.75 * abs(classical) <= abs(hom) <= 1.25 * abs(classical)
    assert hom == pytest.approx(-0.0565551707, abs=1e-9)
    # reversed time makes the loop attracting from the inside
    assert fam.saddle(hom).nu > 1


def test_bt_rejects_positive_beta2():
    with pytest.raises(DomainError):
        bt_family(0.5)


# -- flow-level sparkling -----------------------------------------------------------

def event_oracle(nu, p0):
    """First return of the marked point minus S, with scipy's own event machinery.

    The cubic saddle sits at the origin; its stable branch on the loop side is
    traced in reversed time up to the x-axis, and the marked point ``1.5 - p0``
    is followed forward until it crosses the x-axis downward again.
    """
    f = lambda t, p: [p[1], p[0] - p[0] ** 2 + nu * p[1]]
    g = lambda t, p: [-p[1], -(p[0] - p[0] ** 2 + nu * p[1])]
    mu = (nu - math.sqrt(nu * nu + 4)) / 2
    up = lambda t, p: p[1]
    up.terminal, up.direction = True, 1
    s = solve_ivp(g, (0, 100), [1e-8, 1e-8 * mu], method="DOP853", rtol=1e-13, atol=1e-15, events=up)
    x_s = 1.5 - s.y_events[0][0][0]
    # leave the axis first, then wait for the downward crossing
    first = solve_ivp(f, (0, 1.0), [1.5 - p0, 0.0], method="DOP853", rtol=1e-13, atol=1e-15)
    down = lambda t, p: p[1]
    down.terminal, down.direction = True, 1
    r = solve_ivp(lambda t, p: f(t, p), (0, 100), first.y[:, -1], method="DOP853", rtol=1e-13,
                  atol=1e-15, events=down)
    mid = r.y_events[0][0]
    down2 = lambda t, p: p[1]
    down2.terminal, down2.direction = True, -1
    r = solve_ivp(f, (0, 100), mid + np.array([0.0, 1e-14]), method="DOP853", rtol=1e-13, atol=1e-15,
                  events=down2)
    x_1 = 1.5 - r.y_events[0][0][0]
    return x_1 - x_s


def test_sparkling_first_sheet_independent():
    fam = cubic_family()
    m = measure_sparkling_flow(fam, 0.0, 0.1, 1)
    nu = brentq(lambda v: event_oracle(v, 0.1), 0.7 * m.param, 1.3 * m.param, xtol=1e-14)
    assert m.param == pytest.approx(nu, rel=1e-6)
    assert m.eps == pytest.approx(fam.splitting(nu, 1e-13), rel=1e-5)
    assert m.n == 1 and m.returns[0] <= 1e-12


def test_sparkling_second_sheet_nested():
    fam = cubic_family()
    m1 = measure_sparkling_flow(fam, 0.0, 0.1, 1)
    m2 = measure_sparkling_flow(fam, 0.0, 0.1, 2)
    assert 0 < m2.eps < m1.eps and 0 < m2.offset < m1.offset
    assert m2.returns[0] > 0


def test_sparkling_rejects_n0():
    with pytest.raises(DomainError):
        measure_sparkling_flow(cubic_family(), 0.0, 0.1, 0)


@pytest.fixture(scope="module")
def bt_sheets(bt_loop):
    fam, hom = bt_loop
    return {n: measure_sparkling_flow(fam, hom, 0.1, n).eps for n in range(2, 6)}


def test_bt_sheets_decrease(bt_sheets):
    eps = [bt_sheets[n] for n in range(2, 6)]
    assert all(a > b > 0 for a, b in zip(eps, eps[1:]))
    assert eps[0] == pytest.approx(8.313e-3, rel=1e-3)


def test_flow_map_exponent_agreement(bt_loop, bt_sheets):
    fam, hom = bt_loop
    nu = fam.saddle(hom).nu
    g = fit_map_model(bt_sheets)
    assert abs(g.lam / nu - 1) < 0.10


def test_fit_map_model_recovers_map():
    from polycycle.dulac import LoopReturnMap, solve_sparkling
    g = LoopReturnMap(2.3, 1.7, 0.0, 0.2, 1e6)
    eps = {n: float(solve_sparkling(g, n, bits=128)) for n in (2, 3, 4)}
    h = fit_map_model(eps)
    assert h.lam == pytest.approx(2.3, rel=1e-6)
    h = fit_map_model({2: eps[2], 3: eps[3]}, lam=2.3)
    assert float(h.c) == pytest.approx(1.7, rel=1e-6)
    with pytest.raises(DomainError):
        fit_map_model({2: eps[2]}, lam=2.3)


# -- glued glasses ----------------------------------------------------------------

def glued(**kw):
    spec = {"lambda": 2.0, "rho": 0.6, "eps": 0.0, "sigma": 0.0, "delta": 0.0}
    spec.update(kw)
    return build_glued_glasses(spec)


def test_glued_eigenvalues_exact():
    gg = glued(**{"lambda": 2.5, "rho": 0.4})
    sl = find_saddle(gg.field, gg.L)
    sr = find_saddle(gg.field, gg.R)
    assert sl.eigenvalues == (1.0, -2.5)
    assert sr.eigenvalues == (0.4, -1.0)
    assert sl.nu == 2.5 and sr.nu == 2.5


def test_glued_closure():
    out = glued_splittings(glued())
    assert set(out) == {"l", "b", "r"}
    assert all(abs(v) < 1e-6 for v in out.values())


@pytest.mark.parametrize("key,name", [("l", "eps"), ("b", "sigma"), ("r", "delta")])
@pytest.mark.parametrize("sign", [1, -1])
def test_glued_offset_signs(key, name, sign):
    out = glued_splittings(glued(**{name: sign * 1e-3}))
    assert math.copysign(1, out[key]) == sign
    assert out[key] == pytest.approx(sign * 1e-3, rel=1e-2)
    assert all(abs(v) < 1e-6 for k, v in out.items() if k != key)


def test_glued_spec_roundtrip():
    spec = GluedGlassesSpec.from_dict({"lambda": 2, "rho": 0.5, "eps": 1e-4,
                                       "geometry": {"disk_radius": 0.3, "channel_width": 0.08,
                                                    "centers": {"L": [0, 0], "R": [-1.2, 0]}}})
    d = json.loads(spec.to_json())
    assert set(d) == {"lambda", "rho", "eps", "sigma", "delta", "geometry"}
    assert {"disk_radius", "channel_width", "centers"} <= set(d["geometry"])
    assert GluedGlassesSpec.from_json(spec.to_json()) == spec


def test_glued_geometry_errors():
    with pytest.raises(GeometryError):
        glued(geometry={"channel_width": 0.2})
    with pytest.raises(GeometryError):
        glued(geometry={"centers": [[0, 0], [-0.5, 0]]})
    with pytest.raises(GeometryError):
        glued(eps=0.05)
    with pytest.raises(DomainError):
        glued(rho=1.5)
