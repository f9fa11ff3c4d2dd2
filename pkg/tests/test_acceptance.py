"""Acceptance gate: one test per criterion, each at its stated tolerance.

Run with `pytest tests/test_acceptance.py -v -s` to get one pass/fail line
per criterion.
"""

import math

import numpy as np
import pytest

from stconvex import (ConvexityQuery, CurveSpec, Point, SliceSpec, barrier_scan,
                      builtin_models, canonical_field, certify_region,
                      closed_curve_probe, convexity_along_curve, covariant_hessian,
                      eval_metric, induced_metric, integrate_geodesic,
                      mean_curvature, null_expansions, schwarzschild_trk,
                      slice_laplacian, slice_restricted_hessian)
from stconvex.geodesics import GeodesicState

from conftest import fd_christoffels, fd_gradient, fd_hessian, random_point_in, value_fn

CAT = builtin_models()
MINK = CAT.model("minkowski-cartesian")
SCHW = CAT.model("schwarzschild-exterior")
SCHW_IN = CAT.model("schwarzschild-interior")
MILNE = CAT.model("milne")
MINK_SPH = CAT.model("minkowski-spherical")


def _report(name):
    print(f"\nACCEPTANCE {name}: PASS")


def test_criterion_1_barrier_reproduction():
    for m in (0.5, 1.0, 2.0):
        assert abs(schwarzschild_trk(1.5 * m, m)) <= 1e-12
    scan = barrier_scan(1.0, 0.5, 1.9, 100)
    for r, trk in scan.r_samples:
        if r < 1.5:
            assert trk > 0.0
        elif r > 1.5:
            assert trk < 0.0
    assert scan.sign_pattern_ok
    _report("criterion 1 (barrier closed form and sign pattern)")


def test_criterion_2_level_set_machinery_vs_closed_form():
    field = SCHW_IN.field("r")
    for r in np.linspace(0.1, 1.9, 50):
        machinery = mean_curvature(field, SCHW_IN, Point((0.0, float(r), 1.2, 0.3)))
        closed = schwarzschild_trk(float(r), 1.0)
        assert abs(machinery - closed) <= 1e-8
    _report("criterion 2 (mean curvature of r-slices matches the closed form)")


def test_criterion_3_canonical_certification():
    query = ConvexityQuery(region=((-1.0, 1.0),) * 4, samples_per_axis=5)
    for alpha in (0.25, 0.5, 1.0):
        cert = certify_region(MINK, canonical_field(alpha), query)
        assert cert.verdict == "certified"
        assert abs(cert.c_interval.lo - alpha) <= 1e-9
        assert abs(cert.c_interval.hi - 1.0) <= 1e-9
    violated = certify_region(MINK, canonical_field(1.2), query)
    assert violated.verdict == "violated"
    assert violated.witness is not None
    _report("criterion 3 (canonical family certified exactly for alpha <= 1)")


def test_criterion_4_milne_foliation():
    field = MILNE.field("tau")
    chi, theta = 0.8, 1.0
    unit_hyperbolic = np.diag([1.0, math.sinh(chi) ** 2,
                               math.sinh(chi) ** 2 * math.sin(theta) ** 2])
    for tau in (0.5, 1.0, 2.0):
        p = Point((tau, chi, theta, 0.4))
        assert abs(mean_curvature(field, MILNE, p) - 3.0 / tau) <= 1e-8
        induced = induced_metric(MILNE, SliceSpec("tau", tau), p)
        assert np.abs(induced - tau ** 2 * unit_hyperbolic).max() <= 1e-8
    _report("criterion 4 (Milne foliation: TrK = 3/tau, induced metric tau^2 h)")


def test_criterion_5_no_closed_spacelike_geodesics():
    field = canonical_field(1.0)
    rng = np.random.default_rng(7)
    accepted = 0
    worst = np.inf
    while accepted < 100:
        velocity = rng.uniform(-1.0, 1.0, 4)
        if -velocity[0] ** 2 + velocity[1:] @ velocity[1:] <= 1e-3:
            continue
        accepted += 1
        state = GeodesicState.of(rng.uniform(-1.0, 1.0, 4), velocity)
        trajectory = integrate_geodesic(MINK, state, (0.0, 1.0), step=0.05)
        report = convexity_along_curve(field, trajectory, c=1.0)
        worst = min(worst, report.min_margin)
    assert worst >= -1e-10
    circle = CurveSpec.from_texts(
        ("0", f"cos({2 * math.pi!r}*s)", f"sin({2 * math.pi!r}*s)", "0"))
    probe = closed_curve_probe(field, MINK, circle, c=1.0)
    assert probe.obstructed
    assert probe.min_margin == pytest.approx(-4.0 * math.pi ** 2, rel=1e-9)
    _report("criterion 5 (geodesic margins nonnegative; closed circle obstructed)")


def test_criterion_6_slice_probes():
    flat = canonical_field(0.5)
    p = Point((0.0, 0.3, -0.2, 0.7))
    hessian = slice_restricted_hessian(flat, MINK, SliceSpec("t", 0.0), p)
    assert np.abs(hessian - np.eye(3)).max() <= 1e-10
    assert abs(slice_laplacian(flat, MINK, SliceSpec("t", 0.0), p) - 3.0) <= 1e-10
    # the Milne slice sees only a constant, so the intrinsic probes go flat
    milne_field = MILNE.field("-0.5*tau^2")
    pm = Point((2.0, 0.8, 1.0, 0.4))
    milne_hessian = slice_restricted_hessian(milne_field, MILNE, SliceSpec("tau", 2.0), pm)
    assert np.abs(milne_hessian).max() == 0.0
    _report("criterion 6 (slice probes: identity Hessian/Laplacian 3; Milne zero)")


def test_criterion_7_numerical_hygiene():
    rng = np.random.default_rng(11)
    # exact differentiation vs 4th-order stencils, 4 points on each chart
    fields = {
        MINK: canonical_field(0.7),
        MINK_SPH: MINK_SPH.field("0.5*r^2 - 0.35*t^2"),
        SCHW: SCHW.field("r^2 + t^2/(1 + r)"),
        SCHW_IN: SCHW_IN.field("r"),
        MILNE: MILNE.field("-0.5*tau^2 + sinh(chi)"),
    }
    for model, field in fields.items():
        for _ in range(4):
            x = np.array(random_point_in(model.sample_box, rng))
            metric_at = eval_metric(model, Point(x))
            gamma_fd = fd_christoffels(model, x)
            gamma_err = np.abs(metric_at.christoffels - gamma_fd) \
                / (1.0 + np.abs(metric_at.christoffels))
            assert gamma_err.max() < 1e-6
            fn = value_fn(field.ast, model.coordinate_names, model.parameters)
            hess_fd = fd_hessian(fn, x) - np.einsum(
                "l,lmn->mn", fd_gradient(fn, x), metric_at.christoffels)
            hess = covariant_hessian(field, model, Point(x))
            hess_err = np.abs(hess - hess_fd) / (1.0 + np.abs(hess))
            assert hess_err.max() < 1e-6

    # norm drift over lambda in [0, 10] at the reference step
    omega = math.sqrt(1.0 / 216.0)
    u_t = 1.0 / math.sqrt(0.5)
    psi_dot = omega * u_t
    inclination = 0.3
    orbit = GeodesicState.of(
        (0.0, 6.0, math.pi / 2.0, 0.0),
        (u_t, 0.0, -math.sin(inclination) * psi_dot, math.cos(inclination) * psi_dot))
    trajectory = integrate_geodesic(SCHW, orbit, (0.0, 10.0), step=1e-3)
    assert trajectory.max_norm_drift <= 1e-8
    line = GeodesicState.of((0.0, 0.1, -0.2, 0.3), (1.3, 0.7, -0.4, 0.2))
    flat_trajectory = integrate_geodesic(MINK, line, (0.0, 10.0), step=1e-3)
    assert flat_trajectory.max_norm_drift <= 1e-8

    # RK4 convergence factor under step halving
    def end_error(h, span=20.0):
        tr = integrate_geodesic(SCHW, orbit, (0.0, span), step=h)
        lam, final = tr.samples[-1]
        psi = psi_dot * lam
        direction = np.array([math.cos(psi),
                              math.cos(inclination) * math.sin(psi),
                              math.sin(inclination) * math.sin(psi)])
        exact = np.array([u_t * lam, 6.0, math.acos(direction[2]),
                          math.atan2(direction[1], direction[0])])
        return np.abs(final.position.array() - exact).max()

    factor = end_error(0.2) / end_error(0.1)
    assert 12.0 <= factor <= 20.0
    _report("criterion 7 (AD vs FD 1e-6; norm drift <= 1e-8; RK4 factor in [12, 20])")


def test_criterion_8_null_expansions():
    theta_plus, theta_minus = null_expansions(MINK_SPH, (0.0, 2.0))
    assert abs(theta_plus - 1.0) <= 1e-8
    assert abs(theta_minus + 1.0) <= 1e-8
    trapped_plus, trapped_minus = null_expansions(SCHW_IN, (0.0, 1.0))
    assert trapped_plus * trapped_minus > 0.0
    _report("criterion 8 (sphere expansions (+1, -1); interior sphere trapped)")
