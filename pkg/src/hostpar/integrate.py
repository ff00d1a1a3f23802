"""Adaptive explicit Runge-Kutta integration with events and chart switching.

The stepper is an embedded explicit 5(4) pair (Dormand-Prince coefficients)
with proportional-integral step-size control and first-same-as-last reuse.
Dense output between accepted steps is cubic Hermite, which is accurate
enough for the event tolerances used here.

Model trajectories can be integrated in two charts: the plain phase plane
``(u, v)`` and the logarithmic chart ``(u, w = log v)``.  The log chart is
dramatically less stiff near the infection-free axis and keeps v positive
structurally; the ``auto`` policy switches charts with hysteresis so that
near-extinction passages are resolved without thrashing.  Reported states
are always ``(u, v)`` regardless of the internal chart.

No implicit or stiff methods are provided: the log chart is the intended
remedy for stiffness, and genuine failures surface as step-underflow errors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

from . import fields
from .fields import State
from .params import Params

__all__ = [
    "Event",
    "EventHit",
    "EventNotFoundError",
    "IntegrationError",
    "IntegrationOptions",
    "Trajectory",
    "detect_event",
    "integrate",
    "integrate_generic",
]

# Dormand-Prince 5(4) tableau.
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = _A[6]
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

_SAFETY = 0.9
_FAC_MIN = 0.2
_FAC_MAX = 10.0
_PI_BETA = 0.04
_PI_EXPO = 0.2 - 0.75 * _PI_BETA


class IntegrationError(RuntimeError):
    """Integration could not continue; carries the failure location.

    ``partial`` holds whatever trajectory was accumulated before the
    failure, so callers can retain it (the CLI writes it with a failure
    marker row).
    """

    def __init__(
        self,
        kind: str,
        t: float,
        state: tuple,
        message: str,
        partial: "Trajectory | None" = None,
    ):
        super().__init__(f"{message} (t={t:.6g}, state={state})")
        self.kind = kind
        self.t = t
        self.state = state
        self.partial = partial


class EventNotFoundError(RuntimeError):
    """detect_event was asked for a crossing that never happened."""


@dataclass(frozen=True)
class Event:
    """Zero-crossing detector evaluated on reported states.

    ``hyperplane`` events vanish on a linear functional, ``ball`` events on
    the distance to a center minus a radius, and ``region-exit`` events on
    the margin to the boundary of the triangle u, v >= 0, u + v <= 1.
    """

    kind: str
    normal: tuple[float, ...] = ()
    level: float = 0.0
    center: tuple[float, ...] = ()
    radius: float = 0.0
    direction: int = 0
    terminal: bool = False
    name: str = ""

    @classmethod
    def hyperplane(
        cls,
        normal: Sequence[float],
        level: float,
        *,
        direction: int = 0,
        terminal: bool = False,
        name: str = "",
    ) -> "Event":
        return cls(
            kind="hyperplane",
            normal=tuple(float(c) for c in normal),
            level=float(level),
            direction=direction,
            terminal=terminal,
            name=name or "hyperplane",
        )

    @classmethod
    def ball(
        cls,
        center: Sequence[float],
        radius: float,
        *,
        terminal: bool = False,
        name: str = "",
    ) -> "Event":
        return cls(
            kind="ball",
            center=tuple(float(c) for c in center),
            radius=float(radius),
            direction=-1,
            terminal=terminal,
            name=name or "ball",
        )

    @classmethod
    def region_exit(cls, *, terminal: bool = False, name: str = "") -> "Event":
        return cls(kind="region-exit", direction=-1, terminal=terminal, name=name or "region-exit")

    def value(self, s: tuple) -> float:
        if self.kind == "hyperplane":
            return sum(c * x for c, x in zip(self.normal, s)) - self.level
        if self.kind == "ball":
            return math.dist(s[: len(self.center)], self.center) - self.radius
        if self.kind == "region-exit":
            u, v = s[0], s[1]
            return min(u, v, 1.0 - u - v)
        raise ValueError(f"unknown event kind {self.kind!r}")


@dataclass(frozen=True)
class IntegrationOptions:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    t_max: float = 1000.0
    max_steps: int = 2_000_000
    max_step: float = math.inf
    chart_policy: str = "auto"  # "linear" | "log" | "auto"
    v_switch_low: float = 1e-6
    v_switch_high: float = 1e-5
    events: tuple[Event, ...] = ()

    def __post_init__(self) -> None:
        if not (0.0 < self.rel_tol <= 1e-3):
            raise ValueError(f"rel_tol must lie in (0, 1e-3], got {self.rel_tol}")
        if not (0.0 < self.abs_tol <= 1e-3):
            raise ValueError(f"abs_tol must lie in (0, 1e-3], got {self.abs_tol}")
        if self.t_max <= 0.0:
            raise ValueError(f"t_max must be positive, got {self.t_max}")
        if self.chart_policy not in ("linear", "log", "auto"):
            raise ValueError(f"unknown chart policy {self.chart_policy!r}")
        if not self.v_switch_low < self.v_switch_high:
            raise ValueError("v_switch_low must be below v_switch_high")


@dataclass(frozen=True)
class EventHit:
    name: str
    index: int
    t: float
    state: tuple


@dataclass
class Trajectory:
    times: list[float] = field(default_factory=list)
    states: list[tuple] = field(default_factory=list)
    charts: list[str] = field(default_factory=list)
    events: list[EventHit] = field(default_factory=list)
    terminated: str | None = None
    n_steps: int = 0
    n_rejected: int = 0
    n_fev: int = 0

    @property
    def t_final(self) -> float:
        return self.times[-1]

    @property
    def final_state(self) -> tuple:
        return self.states[-1]


def _norm(vec: tuple, scale: tuple) -> float:
    acc = 0.0
    for e, sc in zip(vec, scale):
        q = e / sc
        acc += q * q
    return math.sqrt(acc / len(vec))


def _hermite(theta: float, h: float, y0: tuple, f0: tuple, y1: tuple, f1: tuple) -> tuple:
    t2 = theta * theta
    t3 = t2 * theta
    h00 = 2.0 * t3 - 3.0 * t2 + 1.0
    h10 = t3 - 2.0 * t2 + theta
    h01 = -2.0 * t3 + 3.0 * t2
    h11 = t3 - t2
    return tuple(
        h00 * a + h10 * h * fa + h01 * b + h11 * h * fb
        for a, fa, b, fb in zip(y0, f0, y1, f1)
    )


def _initial_step(f, t0, y0, f0, t_end, opts: IntegrationOptions) -> tuple[float, int]:
    scale = tuple(opts.abs_tol + opts.rel_tol * abs(yi) for yi in y0)
    d0 = _norm(y0, scale)
    d1 = _norm(f0, scale)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, t_end - t0, opts.max_step)
    y1 = tuple(yi + h0 * fi for yi, fi in zip(y0, f0))
    f1 = f(t0 + h0, y1)
    d2 = _norm(tuple(b - a for a, b in zip(f0, f1)), scale) / h0
    dmax = max(d1, d2)
    h1 = (0.01 / dmax) ** 0.2 if dmax > 1e-15 else max(1e-6, h0 * 1e-3)
    return min(100.0 * h0, h1, t_end - t0, opts.max_step), 1


def _refine_crossing(
    g: Callable[[float], float], glo: float, ghi: float
) -> float:
    """Bisection for the root of g on [0, 1]; g(0)=glo, g(1)=ghi differ in sign."""
    lo, hi = 0.0, 1.0
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm == 0.0:
            return mid
        if (glo < 0.0) == (gm < 0.0):
            lo, glo = mid, gm
        else:
            hi, ghi = mid, gm
        if hi - lo <= 1e-16:
            break
    return 0.5 * (lo + hi)


def integrate_generic(
    f: Callable[[float, tuple], tuple],
    y0: Sequence[float],
    opts: IntegrationOptions,
    *,
    t0: float = 0.0,
    state_map: Callable[[tuple], tuple] | None = None,
    chart_label: str = "linear",
    reject_if: Callable[[tuple], bool] | None = None,
    stop_when: Callable[[tuple], str | None] | None = None,
    traj: Trajectory | None = None,
) -> tuple[Trajectory, str | None]:
    """Integrate dy/dt = f(t, y) from t0 to opts.t_max.

    Returns the trajectory and the reason the run stopped early (a
    ``stop_when`` label), or None when t_max was reached or a terminal
    event fired.  ``state_map`` converts raw integration states into the
    reporting frame used for records and event functions.
    """
    smap = state_map or (lambda y: y)
    y = tuple(float(v) for v in y0)
    t = t0
    t_end = opts.t_max
    if t >= t_end and traj is not None:
        return traj, None
    if traj is None:
        traj = Trajectory()
        traj.times.append(t)
        traj.states.append(smap(y))
        traj.charts.append(chart_label)
        # Surface starting states already outside the admissible region.
        for idx, ev in enumerate(opts.events):
            if ev.kind == "region-exit" and ev.value(smap(y)) < 0.0:
                traj.events.append(EventHit(ev.name, idx, t, smap(y)))
                if ev.terminal:
                    traj.terminated = ev.name
                    return traj, None

    k1 = f(t, y)
    traj.n_fev += 1
    if not all(math.isfinite(c) for c in k1):
        raise IntegrationError(
            "non-finite", t, y, "field evaluation is not finite", partial=traj
        )
    h, extra_fev = _initial_step(f, t, y, k1, t_end, opts)
    traj.n_fev += extra_fev
    facold = 1e-4
    after_reject = False

    while t < t_end:
        if traj.n_steps + traj.n_rejected >= opts.max_steps:
            raise IntegrationError(
                "max-steps", t, smap(y), "maximum step count exceeded", partial=traj
            )
        h = min(h, t_end - t, opts.max_step)
        if h < 1e-16 * max(1.0, abs(t)):
            raise IntegrationError(
                "step-underflow", t, smap(y), "step size underflow", partial=traj
            )

        # Six fresh stages; the stage-7 argument is the order-5 solution and
        # its evaluation doubles as the first stage of the next step (FSAL).
        ks = [k1]
        y1 = y
        failed = False
        for stage in range(1, 7):
            row = _A[stage]
            arg = tuple(
                y[i] + h * sum(row[j] * ks[j][i] for j in range(stage))
                for i in range(len(y))
            )
            knew = f(t + _C[stage] * h, arg)
            traj.n_fev += 1
            if not all(math.isfinite(c) for c in knew):
                failed = True
                break
            ks.append(knew)
            if stage == 6:
                y1 = arg
        if failed:
            traj.n_rejected += 1
            after_reject = True
            h *= 0.25
            continue
        k7 = ks[6]
        err_vec = tuple(
            h * sum(_E[j] * ks[j][i] for j in range(7))
            for i in range(len(y))
        )
        scale = tuple(
            opts.abs_tol + opts.rel_tol * max(abs(a), abs(b)) for a, b in zip(y, y1)
        )
        err = _norm(err_vec, scale)

        if err > 1.0 or (reject_if is not None and reject_if(y1)):
            traj.n_rejected += 1
            after_reject = True
            if err > 1.0:
                h *= max(_FAC_MIN, _SAFETY * err ** (-_PI_EXPO))
            else:
                h *= 0.25
            continue

        # Accepted: collect every event crossing inside the step, process
        # them in time order, and truncate the step at the first terminal one.
        s0_rep = smap(y)
        s1_rep = smap(y1)
        hits: list[tuple[float, int, Event]] = []
        for idx, ev in enumerate(opts.events):
            g0 = ev.value(s0_rep)
            g1 = ev.value(s1_rep)
            if g0 == 0.0:
                continue
            crossed_up = g0 < 0.0 and g1 >= 0.0
            crossed_down = g0 > 0.0 and g1 <= 0.0
            if (
                (ev.direction > 0 and crossed_up)
                or (ev.direction < 0 and crossed_down)
                or (ev.direction == 0 and (crossed_up or crossed_down))
            ):
                gfun = lambda th, _ev=ev: _ev.value(
                    smap(_hermite(th, h, y, k1, y1, k7))
                )
                hits.append((_refine_crossing(gfun, g0, g1), idx, ev))
        hits.sort(key=lambda item: item[0])
        for theta, idx, ev in hits:
            t_hit = t + theta * h
            y_hit = _hermite(theta, h, y, k1, y1, k7)
            traj.events.append(EventHit(ev.name, idx, t_hit, smap(y_hit)))
            if ev.terminal:
                traj.times.append(t_hit)
                traj.states.append(smap(y_hit))
                traj.charts.append(chart_label)
                traj.n_steps += 1
                traj.terminated = ev.name
                return traj, None

        t += h
        y = y1
        k1 = k7
        traj.n_steps += 1
        traj.times.append(t)
        traj.states.append(s1_rep)
        traj.charts.append(chart_label)

        facold_term = facold**_PI_BETA
        fac = _SAFETY * err ** (-_PI_EXPO) * facold_term if err > 0.0 else _FAC_MAX
        fac_max = 1.0 if after_reject else _FAC_MAX
        h *= min(fac_max, max(_FAC_MIN, fac))
        facold = max(err, 1e-4)
        after_reject = False

        if stop_when is not None:
            reason = stop_when(y)
            if reason is not None:
                return traj, reason

    return traj, None


_LINEAR_RHS = {
    "full": fields.full_field,
    "fast": fields.fast_field,
    "aux": fields.aux_field,
}
_LOG_RHS = {
    "full": fields.log_field,
    "fast": fields.fast_log_field,
}


def integrate(
    p: Params,
    s0: State,
    opts: IntegrationOptions | None = None,
    field_id: str = "full",
) -> Trajectory:
    """Integrate a phase-plane field of the model from s0 over [0, t_max].

    All reported states are ``(u, v)`` regardless of the active chart; the
    per-node chart labels record which chart produced each point.  The
    ``aux`` field is polynomial and always integrated in the linear chart.
    """
    if opts is None:
        opts = IntegrationOptions()
    if field_id not in _LINEAR_RHS:
        raise ValueError(f"unknown field {field_id!r}; expected one of {sorted(_LINEAR_RHS)}")
    u0, v0 = s0
    if field_id in ("full", "fast") and u0 + v0 <= 0.0:
        raise fields.SingularOriginError("cannot start a singular field at u + v <= 0")

    policy = opts.chart_policy
    if field_id == "aux" or field_id not in _LOG_RHS:
        policy = "linear"
    if policy == "log" and v0 <= 0.0:
        raise ValueError("log chart requires v0 > 0")

    lin_rhs = _LINEAR_RHS[field_id]
    log_rhs = _LOG_RHS.get(field_id)

    chart = "linear"
    if policy == "log":
        chart = "log"
    elif policy == "auto" and 0.0 < v0 < opts.v_switch_low:
        chart = "log"

    y = (u0, v0) if chart == "linear" else (u0, math.log(v0))
    traj: Trajectory | None = None
    t_now = 0.0
    while True:
        if chart == "linear":
            rhs = lambda t, yy: lin_rhs(p, yy)
            smap = lambda yy: yy
            # Strictly negative only: the axis v == 0 is invariant and valid.
            guard = (lambda yy: yy[1] < 0.0) if policy == "auto" else None
            stopper = (
                (lambda yy: "to-log" if 0.0 < yy[1] < opts.v_switch_low else None)
                if policy == "auto"
                else None
            )
        else:
            rhs = lambda t, yy: log_rhs(p, yy)
            smap = lambda yy: (yy[0], math.exp(yy[1]))
            guard = None
            stopper = (
                (lambda yy: "to-linear" if math.exp(yy[1]) > opts.v_switch_high else None)
                if policy == "auto"
                else None
            )
        traj, reason = integrate_generic(
            rhs,
            y,
            opts,
            t0=t_now,
            state_map=smap,
            chart_label=chart,
            reject_if=guard,
            stop_when=stopper,
            traj=traj,
        )
        if reason is None:
            return traj
        t_now = traj.times[-1]
        if t_now >= opts.t_max:
            return traj
        u_now, v_now = traj.states[-1]
        if reason == "to-log":
            chart = "log"
            y = (u_now, math.log(v_now))
        else:
            chart = "linear"
            y = (u_now, v_now)


def detect_event(
    p: Params,
    s0: State,
    event: Event,
    opts: IntegrationOptions | None = None,
    field_id: str = "full",
) -> EventHit:
    """First crossing of a single event along the orbit from s0.

    Raises :class:`EventNotFoundError` when the horizon passes without a
    crossing.
    """
    if opts is None:
        opts = IntegrationOptions()
    run_opts = replace(opts, events=(replace(event, terminal=True),))
    traj = integrate(p, s0, run_opts, field_id)
    if not traj.events:
        raise EventNotFoundError(
            f"event {event.name!r} did not fire within t_max={opts.t_max}"
        )
    return traj.events[0]
