"""Acceptance suite: ten end-to-end criteria at their pinned tolerances.

Each test records a PASS/FAIL line (printed in the terminal summary) and
then asserts, so a red criterion is visible both ways.
"""
import math
import random

import numpy as np

from conftest import record_criterion

from hostpar import blowup
from hostpar.blowup import ChartId, SectionConstants, section_transit
from hostpar.equilibria import (
    bifurcation_sweep,
    ee_exact,
    ee_expansion,
    reproduction_numbers,
)
from hostpar.fields import dulac_divergence, full_field
from hostpar.geometry import gamma_invariant, score_side_predictions
from hostpar.integrate import IntegrationOptions, integrate
from hostpar.nullclines import theta0_parabola, u_nullcline_branch, v_nullcline
from hostpar.params import CASE_SETS, PRESETS, Params
from hostpar.regimes import (
    canard_metrics,
    classify_regime,
    heteroclinic_cycle_distance,
    homoclinic_experiment,
    lyapunov_monotone,
    standard_ic_grid,
    verify_asymptotics,
)

FIG4 = PRESETS["fig4"]
FIG5A = PRESETS["fig5a"]
FIG5B = PRESETS["fig5b"]
FIG7 = PRESETS["fig7"]


def test_criterion_1_endemic_closed_form():
    ee = ee_exact(FIG7)
    loc_err = max(abs(ee[0] - 0.4883721), abs(ee[1] - 0.0232558))
    residual = max(abs(c) for c in full_field(FIG7, ee))
    expansion = ee_expansion(FIG7)
    exp_err = max(abs(a - b) for a, b in zip(ee, expansion))
    ok = loc_err < 1e-6 and residual < 1e-12 and exp_err < 1.5e-3
    record_criterion(
        "criterion-1 endemic closed form",
        ok,
        f"location error {loc_err:.2e} (tol 1e-6), field residual {residual:.2e} "
        f"(tol 1e-12), expansion error {exp_err:.2e} (tol 1.5e-3)",
    )
    assert ok


def test_criterion_2_bifurcation_window():
    details = []
    ok = True
    widths = {}
    for eps in (0.005, 0.0025):
        p = FIG7.with_eps(eps)
        numbers = reproduction_numbers(p)
        branch = bifurcation_sweep(p, 0.10, 0.13, 301)
        lo, hi = branch.transcritical
        gap = max(abs(lo - (p.d + eps)), abs(hi - (p.d + eps * numbers.alpha_star)))
        ok &= gap < 1e-6
        widths[eps] = hi - lo
        details.append(f"eps={eps}: edge gap {gap:.1e}")
        if eps == 0.005:
            u2 = [r.ee_report.location[0] for r in branch.records if r.ee_report]
            spans = u2[0] > 0.74 and u2[-1] < 0.02 and all(
                b < a for a, b in zip(u2, u2[1:])
            )
            ok &= spans
            details.append(f"u2 span [{u2[-1]:.3f}, {u2[0]:.3f}] monotone={spans}")
    half = widths[0.005] / 2.0
    ratio_dev = abs(widths[0.0025] - half) / half
    ok &= ratio_dev <= 0.05
    details.append(f"halving deviation {ratio_dev:.2%} (tol 5%)")
    record_criterion("criterion-2 bifurcation window", ok, "; ".join(details))
    assert ok


def test_criterion_3_invariant_conservation():
    p = Params(4.0, 0.5, 0.075, 0.1, 0.001)
    ref = gamma_invariant(p, (0.3, 0.3))
    opts = IntegrationOptions(rel_tol=1e-10, abs_tol=1e-13, t_max=200.0)
    traj = integrate(p, (0.3, 0.3), opts, field_id="fast")
    drift = max(abs(gamma_invariant(p, s) - ref) / ref for s in traj.states)
    ok = drift < 1e-7
    record_criterion(
        "criterion-3 invariant conservation", ok, f"relative drift {drift:.2e} (tol 1e-7)"
    )
    assert ok


def test_criterion_4_side_prediction():
    agreements = {}
    for eps in (0.001, 0.0005):
        agreements[eps] = score_side_predictions(FIG4.with_eps(eps)).agreement
    ok = (
        agreements[0.001] >= 0.97
        and agreements[0.0005] >= 0.99
        and agreements[0.0005] >= agreements[0.001]
    )
    record_criterion(
        "criterion-4 side prediction",
        ok,
        f"agreement {agreements[0.001]:.4f} @ eps=1e-3 (tol 0.97), "
        f"{agreements[0.0005]:.4f} @ eps=5e-4 (tol 0.99), monotone",
    )
    assert ok


def test_criterion_5_homoclinic_foliation():
    diag_a = homoclinic_experiment(FIG5A)
    diag_b = homoclinic_experiment(FIG5B)
    returned = sum(d.returned for d in diag_a)
    ratio_a = max(d.approach_ratio for d in diag_a)
    ratio_b = min(d.approach_ratio for d in diag_b)
    ok = returned >= 10 and ratio_a < 0.2 and ratio_b > 0.2
    record_criterion(
        "criterion-5 homoclinic foliation",
        ok,
        f"returned {returned}/12 (tol >= 10); approach u/v: max {ratio_a:.3f} "
        f"for 2d-beta<0 (tol < 0.2), min {ratio_b:.3f} for 2d-beta>0 (tol > 0.2)",
    )
    assert ok


def test_criterion_6_heteroclinic_distance():
    details = []
    ok = True
    for p in (FIG5A, FIG5B):
        dists = heteroclinic_cycle_distance(p, [0.025, 0.01, 0.005])
        decreasing = all(b < a for a, b in zip(dists, dists[1:]))
        ok &= decreasing
        details.append(
            f"d={p.d}: " + " > ".join(f"{x:.4f}" for x in dists) + f" ({decreasing})"
        )
    record_criterion("criterion-6 heteroclinic distance", ok, "; ".join(details))
    assert ok


def test_criterion_7_endemic_global_attraction():
    grid = standard_ic_grid()
    report = verify_asymptotics(FIG7, grid, tol_attract=1e-3)
    excursion = 0.0
    for ic in grid[:5]:
        excursion = max(excursion, canard_metrics(FIG7, ic).slow_excursion)
        if excursion > 0.2:
            break
    converged = sum(o.converged for o in report.outcomes)
    ok = converged == 25 and excursion > 0.2
    record_criterion(
        "criterion-7 endemic global attraction",
        ok,
        f"converged {converged}/25 within 1e-3; max slow-flow excursion "
        f"{excursion:.3f} (tol > 0.2)",
    )
    assert ok


def test_criterion_8_blowup_algebra():
    worst_eig = 0.0
    worst_match = 0.0
    # O1: alpha x beta grid.
    for alpha in (2.0, 3.0, 4.0, 5.0, 6.0):
        for beta in (0.3, 0.4, 0.5, 0.6, 0.7):
            p = Params(alpha, 0.5, beta, 0.1, 0.005)
            for chart in ("K1", "K2"):
                cid = ChartId("O1", chart)
                for eq in blowup.chart_equilibria(cid, p):
                    jac = blowup.chart_jacobian(cid, p, eq.location, eq.slice_axes)
                    tr = jac[0][0] + jac[1][1]
                    det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0]
                    lams = sorted(np.roots([1.0, -tr, det]), key=lambda z: z.real)
                    closed = sorted(eq.eigenvalues, key=lambda z: z.real)
                    scale = 1.0 + max(abs(l) for l in lams)
                    worst_eig = max(
                        worst_eig,
                        max(abs(a - b) for a, b in zip(lams, closed)) / scale,
                    )
            u10 = {e.label: e for e in blowup.chart_equilibria(ChartId("O1", "K1"), p)}
            v22 = {e.label: e for e in blowup.chart_equilibria(ChartId("O1", "K2"), p)}
            worst_match = max(
                worst_match, abs(u10["p1"].location[1] * v22["p1"].location[1] - 1.0)
            )
    # Oeps: alpha x k grid.
    for alpha in (2.0, 3.0, 4.0, 5.0, 6.0):
        for frac in (0.1, 0.3, 0.5, 0.7, 0.9):
            k = 1.0 + frac * (alpha - 1.0)
            p = Params(alpha, 0.5, 0.1 + 0.005 * k, 0.1, 0.005)
            for chart in ("pre", "K3"):
                cid = ChartId("Oeps", chart)
                for eq in blowup.chart_equilibria(cid, p):
                    if not eq.hyperbolic and eq.label == "origin":
                        continue
                    if chart == "pre":
                        jac = _pre_eps0_jacobian(p, eq.location)
                    else:
                        jac = blowup.chart_jacobian(cid, p, eq.location, eq.slice_axes)
                    tr = jac[0][0] + jac[1][1]
                    det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0]
                    lams = sorted(np.roots([1.0, -tr, det]), key=lambda z: (z.real, z.imag))
                    closed = sorted(eq.eigenvalues, key=lambda z: (z.real, z.imag))
                    scale = 1.0 + max(abs(l) for l in lams)
                    worst_eig = max(
                        worst_eig,
                        max(abs(a - b) for a, b in zip(lams, closed)) / scale,
                    )
    # Blow-down residuals, 100 random points per chart.
    rng = random.Random(0)
    worst_res = 0.0
    plans = [
        (ChartId("O1", "K1"), FIG5A, 2),
        (ChartId("O1", "K2"), FIG5A, 2),
        (ChartId("Oeps", "pre"), FIG7, 2),
        (ChartId("Oeps", "K1"), FIG7, 3),
        (ChartId("Oeps", "K2"), FIG7, 3),
        (ChartId("Oeps", "K3"), FIG7, 3),
    ]
    for cid, p, dim in plans:
        for _ in range(100):
            if dim == 2:
                pt = (rng.uniform(1e-4, 0.1), rng.uniform(1e-3, 2.0))
            else:
                pt = (
                    rng.uniform(1e-4, 0.1),
                    rng.uniform(1e-3, 2.0),
                    rng.uniform(1e-3, 2.0),
                )
            worst_res = max(worst_res, blowup.blowdown_consistency(cid, p, pt))
    ok = worst_eig < 1e-10 and worst_match < 1e-12 and worst_res < 1e-10
    record_criterion(
        "criterion-8 blow-up algebra",
        ok,
        f"eigen deviation {worst_eig:.2e} (tol 1e-10), chart matching "
        f"{worst_match:.2e} (tol 1e-12), blow-down residual {worst_res:.2e} (tol 1e-10)",
    )
    assert ok


def _pre_eps0_jacobian(p, loc):
    h = 1e-20
    cols = []
    for j in range(2):
        pert = tuple(c + (1j * h if i == j else 0.0) for i, c in enumerate(loc))
        deriv = blowup.pre_field(p, pert, eps=0.0)
        cols.append([deriv[i].imag / h for i in range(2)])
    return [[cols[j][i] for j in range(2)] for i in range(2)]


def test_criterion_9_section_transit():
    rep_o1 = section_transit(FIG5A, "O1")
    rep_o1_low = section_transit(
        Params(0.5, 0.5, 0.5, 0.1, 0.005), "O1", samples=[(0.002, 1e-4), (0.01, 1e-4)]
    )
    rep_oeps = section_transit(FIG7, "Oeps", constants=SectionConstants(rho=1e-4))
    n_total = len(rep_o1.results) + len(rep_o1_low.results) + len(rep_oeps.results)
    n_ok = sum(
        sum(r.success for r in rep.results)
        for rep in (rep_o1, rep_o1_low, rep_oeps)
    )
    routes = {r.itinerary[1] for r in rep_oeps.results}
    ok = n_ok == n_total and routes == {"Sigma_1to3_out", "Sigma_1to2_out"}
    record_criterion(
        "criterion-9 section transit",
        ok,
        f"{n_ok}/{n_total} itineraries completed; Oeps routes {sorted(routes)}",
    )
    assert ok


def test_criterion_10_negative_controls():
    # Weighted divergence strictly negative on interior grids.
    worst_div = -math.inf
    family = dict(PRESETS)
    family.update(CASE_SETS)
    n = 200
    for p in family.values():
        for i in range(1, n + 1):
            u = i / (n + 1)
            for j in range(1, n + 1):
                v = j / (n + 1)
                if u + v >= 1.0:
                    break
                worst_div = max(worst_div, dulac_divergence(p, (u, v)))
    # Infected fraction monotone when the infection cannot grow.
    monotone = True
    for p in (FIG4, CASE_SETS["case1"]):
        for ic in ((0.3, 0.5), (0.7, 0.2), (0.1, 0.8)):
            traj = integrate(p, ic, IntegrationOptions(t_max=2000.0))
            monotone &= lyapunov_monotone(traj)
    # Residuals of every emitted nullcline point.
    worst_null = 0.0
    for p in (FIG4, FIG7):
        for branch in ("L1", "L2"):
            worst_null = max(worst_null, u_nullcline_branch(p, branch, 200).max_residual)
        slope = v_nullcline(p).slope
        if slope is not None:
            for i in range(1, 101):
                u = 0.009 * i
                worst_null = max(worst_null, abs(full_field(p, (u, slope * u))[1]))
    p0 = Params(4.0, 0.0, 0.075, 0.1, 0.001)
    worst_null = max(worst_null, theta0_parabola(p0, 200).max_residual)
    ok = worst_div < 0.0 and monotone and worst_null < 1e-9
    record_criterion(
        "criterion-10 negative controls",
        ok,
        f"max weighted divergence {worst_div:.2e} (< 0), infected monotone "
        f"{monotone}, max nullcline residual {worst_null:.2e} (tol 1e-9)",
    )
    assert ok


def test_regimes_of_reference_sets():
    # Anchor the five parameter sets the criteria above rely on.
    assert classify_regime(FIG4).tag == "case2"
    assert classify_regime(FIG5A).tag == "case4"
    assert classify_regime(FIG5B).tag == "case4"
    assert classify_regime(FIG7).tag == "case5"
    assert classify_regime(CASE_SETS["case1"]).tag == "case1"
