"""Asymptotic regime classification and the experiments that falsify it.

Five parameter regimes exhaust the dynamics, split by the sign of the
demographic margin alpha - 1, the infection threshold beta vs d + eps, and
the endemic-window edge beta vs d + eps*alpha_star:

==== ==========================================  =================
case defining conditions                         global attractor
==== ==========================================  =================
1    r0 < 1, rd < 0                              extinction (x0)
2    r0 < 1, rd > 0                              infection-free (x1)
3    r0 > 1, rd < 0                              extinction (x0)
4    rd > 0, beta > d + eps*alpha_star           extinction (x0),
                                                 homoclinic sector
5    rd > 0, d + eps < beta < d + eps*alpha_star endemic (x2)
==== ==========================================  =================

Parameter values on the case boundaries (within ``BOUNDARY_TOL``) are
reported as boundaries rather than forced into a case.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from . import equilibria, geometry
from .fields import State
from .integrate import Event, IntegrationError, IntegrationOptions, Trajectory, integrate
from .params import Params

BOUNDARY_TOL = 1e-12

#: Radius within which a homoclinic orbit counts as returned to extinction.
R_HOME = 0.02


@dataclass(frozen=True)
class RegimeCase:
    tag: str  # "case1" .. "case5" | "boundary"
    attractor: str  # "x0" | "x1" | "x2" | ""
    conditions: dict[str, float]
    notes: str = ""


def classify_regime(p: Params) -> RegimeCase:
    numbers = equilibria.reproduction_numbers(p)
    invasion_edge = p.d + p.eps
    window_edge = p.d + p.eps * numbers.alpha_star
    conditions = {
        "r0": numbers.r0,
        "rd": numbers.rd,
        "beta": p.beta,
        "invasion_edge": invasion_edge,
        "window_edge": window_edge,
    }

    def boundary(note: str) -> RegimeCase:
        return RegimeCase(tag="boundary", attractor="", conditions=conditions, notes=note)

    if abs(p.alpha - 1.0) <= BOUNDARY_TOL:
        return boundary("alpha = 1: demographic threshold")
    if abs(p.beta - invasion_edge) <= BOUNDARY_TOL:
        return boundary("beta = d + eps: invasion threshold (r0 = 1)")
    if p.alpha > 1.0 and abs(p.beta - window_edge) <= BOUNDARY_TOL:
        return boundary("beta = d + eps*alpha_star: endemic collapse threshold")
    if abs(p.beta - p.d) <= BOUNDARY_TOL:
        return boundary("beta = d: fast flow degenerate")

    if numbers.r0 < 1.0:
        if p.alpha < 1.0:
            return RegimeCase("case1", "x0", conditions, "extinction through the slow flow")
        return RegimeCase("case2", "x1", conditions, "infection dies out; hosts persist")
    if p.alpha < 1.0:
        return RegimeCase("case3", "x0", conditions, "extinction, possibly after an outbreak")
    if p.beta > window_edge:
        return RegimeCase(
            "case4", "x0", conditions, "extinction with a sector of homoclinic loops"
        )
    return RegimeCase("case5", "x2", conditions, "endemic state attracts everything")


def attractor_location(p: Params, case: RegimeCase) -> State:
    if case.attractor == "x0":
        return (0.0, 0.0)
    if case.attractor == "x1":
        loc = equilibria.dfe(p)
        assert loc is not None
        return loc
    if case.attractor == "x2":
        loc = equilibria.ee_exact(p)
        assert loc is not None
        return loc
    raise ValueError(f"case {case.tag} has no pointwise attractor")


def standard_ic_grid(n: int = 5, lo: float = 0.1, hi: float = 0.9) -> list[State]:
    """n*n interior initial conditions, indexed by total size and mix."""
    return geometry.triangle_grid(n, n, lo, hi)


@dataclass(frozen=True)
class IcOutcome:
    ic: State
    converged: bool
    final_state: State
    final_distance: float
    failure: str | None = None


@dataclass(frozen=True)
class AsymptoticsReport:
    case: RegimeCase
    target: State
    outcomes: tuple[IcOutcome, ...]
    fraction_converged: float


def verify_asymptotics(
    p: Params,
    ics: list[State] | None = None,
    *,
    horizon: float = 40000.0,
    tol_attract: float = 1e-3,
    rel_tol: float = 1e-8,
    abs_tol: float = 1e-12,
) -> AsymptoticsReport:
    """Integrate a grid of initial conditions toward the predicted attractor.

    Success for an initial condition means entering (and therefore staying,
    by stability of the attractors, within numerical wobble of) the ball of
    radius ``tol_attract`` around the prediction.  For extinction-bound
    regimes with r0 < 1 a trajectory whose infected fraction decays
    monotonically to below ``tol_attract`` also counts, even if the horizon
    ends before the susceptibles finish their slow decline.  Integration
    failures are reported per initial condition, never silently dropped.
    """
    case = classify_regime(p)
    if case.tag == "boundary":
        raise ValueError(f"cannot verify asymptotics on a boundary: {case.notes}")
    target = attractor_location(p, case)
    numbers = equilibria.reproduction_numbers(p)
    lyapunov_applies = case.attractor == "x0" and numbers.r0 < 1.0
    if ics is None:
        ics = standard_ic_grid()
    arrive = Event.ball(target, tol_attract, terminal=True, name="arrival")
    opts = IntegrationOptions(
        rel_tol=rel_tol,
        abs_tol=abs_tol,
        t_max=horizon,
        events=(arrive,),
    )
    outcomes = []
    n_ok = 0
    for ic in ics:
        try:
            traj = integrate(p, ic, opts)
        except IntegrationError as exc:
            outcomes.append(
                IcOutcome(
                    ic=ic,
                    converged=False,
                    final_state=tuple(exc.state),
                    final_distance=math.inf,
                    failure=f"{exc.kind}: {exc}",
                )
            )
            continue
        final = traj.final_state
        dist = math.dist(final, target)
        ok = traj.terminated == "arrival" or dist < tol_attract
        if not ok and lyapunov_applies:
            ok = lyapunov_monotone(traj) and final[1] < tol_attract
        n_ok += ok
        outcomes.append(
            IcOutcome(ic=ic, converged=ok, final_state=final, final_distance=dist)
        )
    return AsymptoticsReport(
        case=case,
        target=target,
        outcomes=tuple(outcomes),
        fraction_converged=n_ok / len(outcomes),
    )


@dataclass(frozen=True)
class HomoclinicDiagnostics:
    ic: State
    returned: bool
    u_exit: float | None
    v_max: float
    closest_return: float
    approach_ratio: float | None
    failure: str | None = None


def homoclinic_experiment(
    p: Params,
    ics: list[State] | None = None,
    *,
    r_home: float = R_HOME,
    horizon: float = 4000.0,
    rel_tol: float = 1e-8,
    abs_tol: float = 1e-12,
) -> list[HomoclinicDiagnostics]:
    """Launch orbits just above the infection-free axis and watch them return.

    Requires the homoclinic-sector regime (case 4).  Each orbit starts at
    v0 = eps**2, leaves the slow flow at some exit abscissa (recorded at the
    first upward crossing of v = eps), performs its fast loop, and is
    scored as returned when it enters the ball of radius ``r_home`` around
    the extinction state.  The approach ratio u/v is averaged over the last
    decade of distance before the return.
    """
    case = classify_regime(p)
    if case.tag != "case4":
        raise ValueError(f"homoclinic experiment requires case4, got {case.tag}")
    if ics is None:
        v0 = p.eps**2
        ics = [(u0, v0) for u0 in _linspace(0.05, 0.70, 12)]
    for u0, v0 in ics:
        if not (0.0 < u0 < 1.0 - 1.0 / p.alpha):
            raise ValueError(f"launch abscissa {u0} outside (0, 1 - 1/alpha)")
        if not (0.0 < v0 <= p.eps**2 * (1.0 + 1e-12)):
            raise ValueError(f"launch height {v0} outside (0, eps**2]")

    home = Event.ball((0.0, 0.0), r_home, terminal=True, name="home")
    exit_mark = Event.hyperplane(
        (0.0, 1.0), p.eps, direction=+1, terminal=False, name="slow-exit"
    )
    opts = IntegrationOptions(
        rel_tol=rel_tol,
        abs_tol=abs_tol,
        t_max=horizon,
        max_step=1.0,
        events=(home, exit_mark),
    )
    results = []
    for ic in ics:
        try:
            traj = integrate(p, ic, opts)
        except IntegrationError as exc:
            results.append(
                HomoclinicDiagnostics(
                    ic=ic,
                    returned=False,
                    u_exit=None,
                    v_max=math.nan,
                    closest_return=math.inf,
                    approach_ratio=None,
                    failure=f"{exc.kind}: {exc}",
                )
            )
            continue
        exits = [h for h in traj.events if h.name == "slow-exit"]
        u_exit = exits[0].state[0] if exits else None
        peak = max(range(len(traj.states)), key=lambda i: traj.states[i][1])
        v_max = traj.states[peak][1]
        dists = [math.hypot(su, sv) for su, sv in traj.states]
        closest = min(dists)
        # Only the descent after the infection peak counts as the approach.
        ratios = [
            su / sv
            for (su, sv), dist in zip(traj.states[peak:], dists[peak:])
            if sv > 0.0 and r_home <= dist <= 10.0 * r_home
        ]
        results.append(
            HomoclinicDiagnostics(
                ic=ic,
                returned=traj.terminated == "home",
                u_exit=u_exit,
                v_max=v_max,
                closest_return=closest,
                approach_ratio=sum(ratios) / len(ratios) if ratios else None,
            )
        )
    return results


def heteroclinic_cycle_distance(
    p: Params,
    eps_list: list[float],
    *,
    u_window: tuple[float, float] | None = None,
    horizon: float = 6000.0,
    rel_tol: float = 1e-8,
    abs_tol: float = 1e-12,
) -> list[float]:
    """Maximum vertical gap between a near-cycle orbit and the separatrix.

    For each eps the orbit is launched from (1 - 1/alpha - eps, eps**2) and
    tracked until it returns near extinction; the gap |v - gamma(u)| is
    maximized over trajectory samples with u inside ``u_window``.
    """
    if u_window is None:
        u_window = (0.2, 1.0 - 1.0 / p.alpha)
    distances = []
    for eps in eps_list:
        pe = p.with_eps(eps)
        case = classify_regime(pe)
        if case.tag != "case4":
            raise ValueError(f"eps={eps} leaves the homoclinic regime ({case.tag})")
        s0 = (1.0 - 1.0 / pe.alpha - eps, eps**2)
        home = Event.ball((0.0, 0.0), R_HOME, terminal=True, name="home")
        opts = IntegrationOptions(
            rel_tol=rel_tol,
            abs_tol=abs_tol,
            t_max=horizon,
            max_step=0.5,
            events=(home,),
        )
        traj = integrate(pe, s0, opts)
        gap = 0.0
        for su, sv in traj.states:
            if u_window[0] <= su <= u_window[1]:
                gap = max(gap, abs(sv - geometry.separatrix_gamma(pe, su)))
        distances.append(gap)
    return distances


@dataclass(frozen=True)
class CanardMetrics:
    slow_excursion: float
    alternations: int
    captured: bool
    final_state: State
    final_distance: float


def canard_metrics(
    p: Params,
    s0: State,
    *,
    horizon: float = 40000.0,
    capture_tol: float = 1e-3,
    rel_tol: float = 1e-8,
    abs_tol: float = 1e-12,
) -> CanardMetrics:
    """Measure the slow-flow excursion of an endemic-regime orbit.

    The slow excursion is the largest u-distance traveled during a maximal
    stretch with v < eps (travel along the repelling infection-free axis);
    alternations count the downward crossings of v = eps before capture by
    the endemic state.
    """
    case = classify_regime(p)
    if case.tag != "case5":
        raise ValueError(f"canard metrics require case5, got {case.tag}")
    target = attractor_location(p, case)
    arrive = Event.ball(target, capture_tol, terminal=True, name="arrival")
    dip = Event.hyperplane((0.0, 1.0), p.eps, direction=-1, terminal=False, name="dip")
    opts = IntegrationOptions(
        rel_tol=rel_tol,
        abs_tol=abs_tol,
        t_max=horizon,
        events=(arrive, dip),
    )
    traj = integrate(p, s0, opts)

    best = 0.0
    lo = hi = None
    for su, sv in traj.states:
        if sv < p.eps:
            if lo is None:
                lo = hi = su
            else:
                lo, hi = min(lo, su), max(hi, su)
        else:
            if lo is not None:
                best = max(best, hi - lo)
                lo = hi = None
    if lo is not None:
        best = max(best, hi - lo)

    return CanardMetrics(
        slow_excursion=best,
        alternations=sum(1 for h in traj.events if h.name == "dip"),
        captured=traj.terminated == "arrival",
        final_state=traj.final_state,
        final_distance=math.dist(traj.final_state, target),
    )


def lyapunov_monotone(traj: Trajectory, slack: float = 1e-12) -> bool:
    """Whether the infected fraction is non-increasing along a trajectory."""
    return all(
        later[1] <= earlier[1] + slack
        for earlier, later in zip(traj.states, traj.states[1:])
    )


def _linspace(lo: float, hi: float, n: int) -> list[float]:
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]
