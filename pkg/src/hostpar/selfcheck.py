"""Cross-cutting invariant suite behind the ``selfcheck`` CLI command.

Each check is independent, deterministic (seeded sampling), and returns a
pass/fail verdict with a one-line numeric summary, so a fresh build can be
validated end to end in well under two minutes.
"""
from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import blowup, equilibria, fields, geometry, nullclines, regimes
from .blowup import ChartId
from .integrate import IntegrationOptions, integrate
from .params import CASE_SETS, PRESETS, Params


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _param_family() -> dict[str, Params]:
    family = dict(PRESETS)
    for name, p in CASE_SETS.items():
        family.setdefault(name, p)
    return family


def check_dulac_negativity(n: int = 200) -> tuple[bool, str]:
    worst = -math.inf
    for p in _param_family().values():
        for i in range(1, n + 1):
            u = i / (n + 1)
            for j in range(1, n + 1):
                v = j / (n + 1)
                if u + v >= 1.0:
                    break
                worst = max(worst, fields.dulac_divergence(p, (u, v)))
    return worst < 0.0, f"max divergence on interior grids = {worst:.3e}"


def check_gamma_conservation() -> tuple[bool, str]:
    p = Params(alpha=4.0, theta=0.5, beta=0.075, d=0.1, eps=0.001)
    s0 = (0.3, 0.3)
    ref = geometry.gamma_invariant(p, s0)
    opts = IntegrationOptions(rel_tol=1e-10, abs_tol=1e-13, t_max=200.0)
    traj = integrate(p, s0, opts, field_id="fast")
    drift = max(
        abs(geometry.gamma_invariant(p, s) - ref) / ref for s in traj.states
    )
    return drift < 1e-7, f"relative invariant drift = {drift:.3e}"


def check_blowdown_residuals(n: int = 100, seed: int = 0) -> tuple[bool, str]:
    rng = random.Random(seed)
    worst = 0.0
    p_o1 = PRESETS["fig5a"]
    p_oeps = PRESETS["fig7"]
    plans = [
        (ChartId("O1", "K1"), p_o1, lambda: (rng.uniform(1e-4, 0.05), rng.uniform(1e-3, 2.0))),
        (ChartId("O1", "K2"), p_o1, lambda: (rng.uniform(1e-4, 0.05), rng.uniform(1e-3, 2.0))),
        (ChartId("Oeps", "pre"), p_oeps, lambda: (rng.uniform(1e-3, 0.9), rng.uniform(1e-3, 2.0))),
        (
            ChartId("Oeps", "K1"),
            p_oeps,
            lambda: (rng.uniform(1e-4, 0.05), rng.uniform(1e-3, 2.0), rng.uniform(1e-3, 2.0)),
        ),
        (
            ChartId("Oeps", "K2"),
            p_oeps,
            lambda: (rng.uniform(1e-4, 0.05), rng.uniform(1e-3, 2.0), rng.uniform(1e-3, 2.0)),
        ),
        (
            ChartId("Oeps", "K3"),
            p_oeps,
            lambda: (rng.uniform(1e-4, 0.05), rng.uniform(1e-3, 2.0), rng.uniform(1e-3, 2.0)),
        ),
    ]
    for cid, p, draw in plans:
        for _ in range(n):
            worst = max(worst, blowup.blowdown_consistency(cid, p, draw()))
    return worst < 1e-10, f"max blow-down residual = {worst:.3e}"


def check_transition_identities(seed: int = 0) -> tuple[bool, str]:
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(50):
        pt = (rng.uniform(1e-3, 0.1), rng.uniform(0.05, 3.0))
        image = blowup.transition_map(ChartId("O1", "K2"), ChartId("O1", "K1"),
                                      blowup.transition_map(ChartId("O1", "K1"), ChartId("O1", "K2"), pt))
        worst = max(worst, abs(image[0] - pt[0]), abs(image[1] - pt[1]))
    for pair in (("K1", "K2"), ("K1", "K3"), ("K2", "K3")):
        src = ChartId("Oeps", pair[0])
        dst = ChartId("Oeps", pair[1])
        for _ in range(50):
            pt = (rng.uniform(1e-3, 0.1), rng.uniform(0.05, 3.0), rng.uniform(0.05, 3.0))
            image = blowup.transition_map(dst, src, blowup.transition_map(src, dst, pt))
            worst = max(worst, max(abs(a - b) for a, b in zip(image, pt)))
    # The two charts of regime O1 see the same sphere equilibrium.
    p = PRESETS["fig5a"]
    k1_eqs = {eq.label: eq for eq in blowup.chart_equilibria(ChartId("O1", "K1"), p)}
    k2_eqs = {eq.label: eq for eq in blowup.chart_equilibria(ChartId("O1", "K2"), p)}
    prod = k1_eqs["p1"].location[1] * k2_eqs["p1"].location[1]
    worst = max(worst, abs(prod - 1.0))
    return worst < 1e-12, f"max round-trip/matching deviation = {worst:.3e}"


def check_jacobian_fd(seed: int = 0) -> tuple[bool, str]:
    rng = random.Random(seed)
    worst = 0.0
    for p in (PRESETS["fig4"], PRESETS["fig5a"], PRESETS["fig7"]):
        for _ in range(100):
            size = rng.uniform(0.05, 0.95)
            mix = rng.uniform(0.05, 0.95)
            s = (size * (1.0 - mix), size * mix)
            jac = equilibria.jacobian(p, s)
            h = 1e-6 * max(1.0, math.hypot(*s))
            fd = np.empty((2, 2))
            for j in range(2):
                plus = list(s)
                minus = list(s)
                plus[j] += h
                minus[j] -= h
                fp = fields.full_field(p, tuple(plus))
                fm = fields.full_field(p, tuple(minus))
                fd[0, j] = (fp[0] - fm[0]) / (2.0 * h)
                fd[1, j] = (fp[1] - fm[1]) / (2.0 * h)
            worst = max(worst, float(np.max(np.abs(jac - fd))))
    return worst < 1e-5, f"max |analytic - finite difference| = {worst:.3e}"


def check_classifier_vs_simulation() -> tuple[bool, str]:
    grid = regimes.standard_ic_grid(3, lo=0.15, hi=0.8)
    fractions = []
    for name in ("case1", "case2", "case5"):
        report = regimes.verify_asymptotics(CASE_SETS[name], grid)
        fractions.append(report.fraction_converged)
    ok = all(f == 1.0 for f in fractions)
    return ok, f"converged fractions = {[f'{f:.2f}' for f in fractions]}"


def check_nullcline_residuals() -> tuple[bool, str]:
    worst = 0.0
    for p in (PRESETS["fig4"], PRESETS["fig7"]):
        for branch in ("L1", "L2"):
            worst = max(worst, nullclines.u_nullcline_branch(p, branch, 120).max_residual)
    p0 = Params(alpha=4.0, theta=0.0, beta=0.075, d=0.1, eps=0.001)
    worst = max(worst, nullclines.theta0_parabola(p0, 120).max_residual)
    return worst < 1e-9, f"max emitted-point residual = {worst:.3e}"


def check_endemic_identities() -> tuple[bool, str]:
    p = PRESETS["fig7"]
    ee = equilibria.ee_exact(p)
    assert ee is not None
    res = max(abs(c) for c in fields.full_field(p, ee))
    numbers = equilibria.reproduction_numbers(p)
    slope_gap = abs(ee[1] - ee[0] * (numbers.r0 - 1.0))
    branch = equilibria.bifurcation_sweep(p, 0.10, 0.13, 301)
    lo, hi = branch.transcritical
    edge_gap = max(
        abs(lo - (p.d + p.eps)),
        abs(hi - (p.d + p.eps * numbers.alpha_star)),
    )
    ok = res < 1e-12 and slope_gap < 1e-15 and edge_gap < 1e-6
    return ok, (
        f"field residual {res:.1e}, slope identity {slope_gap:.1e}, "
        f"window-edge gap {edge_gap:.1e}"
    )


_CHECKS: tuple[tuple[str, Callable[[], tuple[bool, str]]], ...] = (
    ("dulac-negativity", check_dulac_negativity),
    ("gamma-conservation", check_gamma_conservation),
    ("blowdown-residuals", check_blowdown_residuals),
    ("transition-identities", check_transition_identities),
    ("jacobian-finite-difference", check_jacobian_fd),
    ("nullcline-residuals", check_nullcline_residuals),
    ("endemic-identities", check_endemic_identities),
    ("classifier-vs-simulation", check_classifier_vs_simulation),
)


def run_selfcheck() -> list[CheckResult]:
    results = []
    for name, fn in _CHECKS:
        started = time.perf_counter()
        try:
            passed, detail = fn()
        except Exception as exc:  # surface, never hide, a broken check
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append(CheckResult(name, passed, detail, time.perf_counter() - started))
    return results
