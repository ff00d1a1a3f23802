"""Vector fields of the host-parasite model in all of its formulations.

Every function here is pure: it maps ``(Params, state)`` to a derivative
tuple and keeps no internal state, so evaluations are reentrant and safe to
share across threads.  States are plain ``(u, v)`` tuples; the logarithmic
chart uses ``(u, w)`` with ``w = log v``.

The full field is singular at the origin because of the frequency-dependent
infection term ``beta*u*v/(u+v)``.  Callers that need to pass through a
neighborhood of the extinction state switch to the polynomial auxiliary
field (the ``(u+v)``-multiplied system) or to the blow-up charts.
"""
from __future__ import annotations

import math

from .params import Params

State = tuple[float, float]
Deriv = tuple[float, float]


class SingularOriginError(ValueError):
    """The requested field is undefined at u + v = 0."""


def in_delta(s: State, tol: float = 0.0) -> bool:
    """Whether a state lies in the biologically relevant triangle."""
    u, v = s
    return u >= -tol and v >= -tol and u + v <= 1.0 + tol


def full_field(p: Params, s: State) -> Deriv:
    """Time derivative of (u, v) under the complete slow-fast model.

    Singular at the origin; raises :class:`SingularOriginError` there so that
    callers can switch to the auxiliary or blow-up description instead of
    propagating NaNs.
    """
    u, v = s
    tot = u + v
    if tot == 0.0:
        raise SingularOriginError("full field is undefined at u + v = 0")
    infection = p.beta * u * v / tot
    du = p.eps * p.alpha * (u + p.theta * v) * (1.0 - tot) - p.eps * u - infection
    dv = infection - p.d * v - p.eps * v
    return du, dv


def fast_field(p: Params, s: State) -> Deriv:
    """Infection-timescale part of the field (the eps -> 0 limit)."""
    u, v = s
    tot = u + v
    if tot == 0.0:
        raise SingularOriginError("fast field is undefined at u + v = 0")
    infection = p.beta * u * v / tot
    return -infection, infection - p.d * v


def slow_component(p: Params, s: State) -> Deriv:
    """Demographic part of the field; full = fast + eps * slow_component."""
    u, v = s
    return p.alpha * (u + p.theta * v) * (1.0 - u - v) - u, -v


def slow_field(p: Params, y: State) -> Deriv:
    """Derivative of ``(u, x)`` on the slow timescale, where v = eps * x.

    The infected coordinate is rescaled so that dynamics O(eps**2)-close to
    the infection-free axis become O(1); time is measured in units of 1/eps.
    """
    u, x = y
    denom = u + p.eps * x
    if denom == 0.0:
        raise SingularOriginError("slow field is undefined at u + eps*x = 0")
    du = (
        p.alpha * (u + p.eps * p.theta * x) * (1.0 - u - p.eps * x)
        - u
        - p.beta * u * x / denom
    )
    dx = x * (p.beta * u / denom - p.d - p.eps) / p.eps
    return du, dx


def reduced_slow_flow(p: Params, u0: float, tau: float) -> float:
    """Closed-form solution of the flow on the infection-free axis.

    The reduced equation u' = alpha*u*(1-u) - u is logistic with rate
    alpha - 1 and carrying value 1 - 1/alpha; for alpha = 1 it degenerates
    to the pure-decay equation u' = -u**2.  Used as an integration oracle.
    """
    if u0 < 0:
        raise ValueError(f"u0 must be nonnegative, got {u0}")
    if u0 == 0.0:
        return 0.0
    if p.alpha == 1.0:
        return u0 / (1.0 + u0 * tau)
    r = p.alpha - 1.0
    cap = r / p.alpha
    growth = math.exp(r * tau)
    return cap * u0 * growth / (cap + u0 * (growth - 1.0))


def log_field(p: Params, ls: State) -> Deriv:
    """Derivative of ``(u, w)`` with w = log v.

    This chart removes the stiffness of near-extinct infected populations:
    dw = dv/v stays O(1) while v itself may be arbitrarily small (yet
    positive, which the chart enforces structurally).
    """
    u, w = ls
    v = math.exp(w)
    tot = u + v
    if tot <= 0.0:
        raise SingularOriginError("log field is undefined at u + exp(w) <= 0")
    frac = u / tot
    du = (
        p.eps * p.alpha * (u + p.theta * v) * (1.0 - tot)
        - p.eps * u
        - p.beta * v * frac
    )
    dw = p.beta * frac - p.d - p.eps
    return du, dw


def fast_log_field(p: Params, ls: State) -> Deriv:
    """Logarithmic chart of the fast field."""
    u, w = ls
    v = math.exp(w)
    tot = u + v
    if tot <= 0.0:
        raise SingularOriginError("log field is undefined at u + exp(w) <= 0")
    frac = u / tot
    return -p.beta * v * frac, p.beta * frac - p.d


def aux_field(p: Params, s: State) -> Deriv:
    """The (u+v)-multiplied field: polynomial, defined at the origin.

    Proportional to :func:`full_field` by the positive factor (u+v) wherever
    u + v > 0, so it has the same orbits with a reparametrized time.
    """
    u, v = s
    tot = u + v
    du = (
        p.eps * p.alpha * (u + p.theta * v) * (1.0 - tot) * tot
        - p.eps * u * tot
        - p.beta * u * v
    )
    dv = (p.beta - p.d) * u * v - p.d * v * v - p.eps * v * tot
    return du, dv


def dulac_divergence(p: Params, s: State) -> float:
    """Divergence of the field after weighting by 1/(u*v).

    Equals ``-eps*alpha*(1/v + theta*(1-v)/u**2)``, which is strictly
    negative on the interior of the triangle; a single-signed weighted
    divergence rules out closed orbits there.
    """
    u, v = s
    if u <= 0.0 or v <= 0.0:
        raise ValueError("Dulac divergence requires an interior state (u, v > 0)")
    return -p.eps * p.alpha * (1.0 / v + p.theta * (1.0 - v) / (u * u))
