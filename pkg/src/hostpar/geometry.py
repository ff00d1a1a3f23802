"""Fast-flow conserved quantity and the separatrix curves built from it.

Along the infection-timescale flow the quantity (u+v) * u**(-d/beta) is
conserved, which pins down where an orbit lands on the infection-free axis.
Level curves of that quantity through the infection-free equilibrium (or
through an arbitrary axis point) act as separatrices for the slow dynamics.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .fields import State
from .params import Params

#: Absolute tolerance on the conserved quantity for declaring a state to be
#: exactly on the separatrix.
ON_CURVE_TOL = 1e-12


class RegimeError(ValueError):
    """The operation is only meaningful in a different parameter regime."""


class Side(enum.Enum):
    """Which side of the infection-free equilibrium an orbit lands on."""

    LEFT = "left"
    RIGHT = "right"
    ON_CURVE = "on-curve"


def gamma_invariant(p: Params, s: State) -> float:
    """Fast-flow constant of motion (u+v) * u**(-d/beta); needs u > 0."""
    u, v = s
    if u <= 0.0:
        raise ValueError(f"the invariant requires u > 0, got u={u}")
    return (u + v) * u ** (-p.d / p.beta)


def u_infinity(p: Params, s0: State) -> float:
    """Axis point reached by the fast flow started from s0.

    For beta < d the invariant gives u0*(1 + v0/u0)**(beta/(beta-d)); for
    beta >= d the susceptible fraction collapses all the way to zero.
    """
    u0, v0 = s0
    if u0 <= 0.0:
        raise ValueError(f"u0 must be positive, got {u0}")
    if v0 < 0.0:
        raise ValueError(f"v0 must be nonnegative, got {v0}")
    if p.beta >= p.d:
        return 0.0
    return u0 * (1.0 + v0 / u0) ** (p.beta / (p.beta - p.d))


def separatrix_gamma(p: Params, u: float) -> float:
    """Height of the invariant level curve through the infection-free state.

    May be negative where the curve leaves the triangle.
    """
    if p.alpha <= 1.0:
        raise RegimeError("the separatrix needs alpha > 1 (no infection-free state)")
    if u <= 0.0:
        raise ValueError(f"u must be positive, got {u}")
    ratio = p.d / p.beta
    return u**ratio * (1.0 - 1.0 / p.alpha) ** (1.0 - ratio) - u


def exit_curve(p: Params, u_exit: float, u: float) -> float:
    """Invariant level curve through the axis point (u_exit, 0)."""
    if u_exit <= 0.0:
        raise ValueError(f"u_exit must be positive, got {u_exit}")
    if u <= 0.0:
        raise ValueError(f"u must be positive, got {u}")
    ratio = p.d / p.beta
    return u**ratio * u_exit ** (1.0 - ratio) - u


def predict_side(p: Params, s0: State) -> Side:
    """Predict on which side of the infection-free state the slow flow begins.

    Valid in the recovering regime beta < d with alpha > 1: there the axis
    restriction of the invariant is decreasing in u, so comparing invariant
    values decides whether the fast flow lands left or right of 1 - 1/alpha.
    Ties within ``ON_CURVE_TOL`` are reported as a third value rather than
    forced onto a side.
    """
    if p.alpha <= 1.0:
        raise RegimeError("side prediction needs alpha > 1")
    if p.beta >= p.d:
        raise RegimeError("side prediction needs beta < d (recovering regime)")
    value = gamma_invariant(p, s0)
    anchor = gamma_invariant(p, (1.0 - 1.0 / p.alpha, 0.0))
    if abs(value - anchor) <= ON_CURVE_TOL:
        return Side.ON_CURVE
    return Side.RIGHT if value < anchor else Side.LEFT


@dataclass(frozen=True)
class SidePredictionRecord:
    ic: State
    predicted: Side
    simulated: Side
    entry_u: float


@dataclass(frozen=True)
class SidePredictionScore:
    records: tuple[SidePredictionRecord, ...]
    agreement: float


def triangle_grid(n_size: int, n_mix: int, lo: float = 0.05, hi: float = 0.95) -> list[State]:
    """Deterministic grid of interior states of the triangle.

    Rows index the total population size u+v and columns its split between
    the two compartments, so every one of the n_size*n_mix points is valid.
    """

    def axis(n: int) -> list[float]:
        if n == 1:
            return [(lo + hi) / 2.0]
        return [lo + (hi - lo) * i / (n - 1) for i in range(n)]

    return [
        (size * (1.0 - mix), size * mix) for size in axis(n_size) for mix in axis(n_mix)
    ]


def score_side_predictions(
    p: Params,
    ics: list[State] | None = None,
    *,
    rel_tol: float = 1e-8,
    abs_tol: float = 1e-12,
    horizon: float = 5000.0,
) -> SidePredictionScore:
    """Compare side predictions with simulated slow-flow entry points.

    Entry into the slow flow is operationalized as the first downward
    crossing of v = eps**2; the simulated side is the sign of the entry
    u-value relative to 1 - 1/alpha.
    """
    from .integrate import Event, IntegrationOptions, integrate

    if ics is None:
        ics = triangle_grid(20, 20)
    target = 1.0 - 1.0 / p.alpha
    entry = Event.hyperplane(
        normal=(0.0, 1.0), level=p.eps**2, direction=-1, terminal=True, name="slow-entry"
    )
    opts = IntegrationOptions(
        rel_tol=rel_tol,
        abs_tol=abs_tol,
        t_max=horizon,
        events=(entry,),
        v_switch_low=min(1e-6, p.eps**2 / 10.0),
        v_switch_high=min(1e-5, p.eps**2),
    )
    records = []
    hits = 0
    for ic in ics:
        predicted = predict_side(p, ic)
        traj = integrate(p, ic, opts)
        if traj.terminated != "slow-entry":
            raise RuntimeError(f"orbit from {ic} never entered the slow flow")
        entry_u = traj.states[-1][0]
        simulated = Side.RIGHT if entry_u > target else Side.LEFT
        records.append(
            SidePredictionRecord(ic=ic, predicted=predicted, simulated=simulated, entry_u=entry_u)
        )
        if predicted is simulated:
            hits += 1
    return SidePredictionScore(records=tuple(records), agreement=hits / len(records))
