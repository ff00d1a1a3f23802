"""Nullclines of the model: the infected-balance line and the growth curves.

The v-nullcline is elementary (the u-axis, plus the ray v = (r0-1)*u when
r0 > 1).  The u-nullcline is a cubic curve whose triangle portion splits
into two branches: one hugging the v-axis with steep slope k1 = O(1/eps)
and, when alpha > 1, one hugging the u-axis with shallow slope k2 = O(eps).
Both are sampled exactly through a polar parametrization; for theta = 0 the
second branch degenerates to a parabola of height O(eps).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .equilibria import jacobian, reproduction_numbers
from .fields import State, full_field, in_delta
from .params import Params

#: Residual bound accepted for emitted branch points after one Newton polish.
TOL_NULL = 1e-9

#: Angular offset from arc endpoints where the polar numerator vanishes.
ENDPOINT_OFFSET = 1e-6


@dataclass(frozen=True)
class NullclineSlopes:
    """Slopes of the asymptotic rays bounding the u-nullcline branches.

    ``k1`` and ``k2`` are the roots of k**2 - c2*k + c1 = 0, with c1 of
    order one and c2 of order 1/eps; k1 is always the larger root.
    """

    k1: float
    k2: float
    c1: float
    c2: float
    degenerate: bool = False


@dataclass(frozen=True)
class VNullclines:
    """The u-axis (always) plus the ray v = slope*u when the infection can grow."""

    slope: float | None


@dataclass(frozen=True)
class BranchCurve:
    branch: str  # "L1" | "L2" | "theta0-parabola" | "v-line"
    points: tuple[State, ...]
    parameters: tuple[float, ...]  # polar angle phi, or abscissa u
    max_residual: float


def v_nullcline(p: Params) -> VNullclines:
    numbers = reproduction_numbers(p)
    if numbers.r0 <= 1.0:
        return VNullclines(slope=None)
    return VNullclines(slope=numbers.r0 - 1.0)


def nullcline_slopes(p: Params) -> NullclineSlopes:
    """Solve for the bounding slopes with the cancellation-free root formula.

    The larger root comes from the quadratic formula directly; the smaller
    one from the product identity k1*k2 = c1, which avoids the catastrophic
    cancellation of c2 - sqrt(c2**2 - 4*c1) when c2 is large.
    """
    if p.theta == 0.0:
        raise ValueError("slopes are undefined for theta = 0; use theta0_parabola")
    eat = p.eps * p.alpha * p.theta
    c1 = (p.alpha - 1.0) / (p.alpha * p.theta)
    c2 = (p.beta + p.eps - p.eps * p.alpha - eat) / eat
    disc = c2 * c2 - 4.0 * c1
    if disc < 0.0:
        raise ArithmeticError(
            f"negative slope discriminant {disc}; parameters are outside the "
            "regime where the u-nullcline splits into ray-bounded branches"
        )
    k1 = 0.5 * (c2 + math.sqrt(disc))
    if c1 == 0.0:
        return NullclineSlopes(k1=k1, k2=0.0, c1=c1, c2=c2, degenerate=True)
    return NullclineSlopes(k1=k1, k2=c1 / k1, c1=c1, c2=c2)


def polar_radius(p: Params, phi: float) -> float:
    """Radius of the u-nullcline at polar angle phi (exact algebraic form)."""
    slopes = nullcline_slopes(p)
    s, c = math.sin(phi), math.cos(phi)
    num = (s - slopes.k2 * c) * (s - slopes.k1 * c)
    den = (c / p.theta + s) * (c + s) ** 2
    return num / den


def _newton_polish(p: Params, u: float, v: float, phi: float) -> State:
    """One Newton step on the u-component of the field, radially."""
    du, _ = full_field(p, (u, v))
    jac = jacobian(p, (u, v))
    slope = jac[0, 0] * math.cos(phi) + jac[0, 1] * math.sin(phi)
    if slope != 0.0:
        rho_corr = du / slope
        u -= rho_corr * math.cos(phi)
        v -= rho_corr * math.sin(phi)
    return (u, v)


def u_nullcline_branch(p: Params, branch: str, n: int = 200) -> BranchCurve:
    """Sample one branch of the u-nullcline inside the triangle.

    Angles are uniform over the branch arc with a small endpoint offset
    (the polar numerator vanishes at the arc boundaries); each Cartesian
    sample gets one radial Newton polish to scrub floating error.
    """
    if p.theta == 0.0:
        raise ValueError("theta = 0 has no polar branches; use theta0_parabola")
    if n < 2:
        raise ValueError(f"need at least 2 samples, got {n}")
    slopes = nullcline_slopes(p)
    if branch == "L1":
        lo, hi = math.atan(slopes.k1), math.pi / 2.0
    elif branch == "L2":
        if p.alpha <= 1.0:
            raise ValueError("branch L2 is empty for alpha <= 1")
        lo, hi = 0.0, math.atan(slopes.k2)
    else:
        raise ValueError(f"unknown branch {branch!r}; expected 'L1' or 'L2'")
    lo += ENDPOINT_OFFSET
    hi -= ENDPOINT_OFFSET

    phis, pts = [], []
    max_res = 0.0
    for i in range(n):
        phi = lo + (hi - lo) * i / (n - 1)
        rho = polar_radius(p, phi)
        if rho <= 0.0:
            continue
        u, v = rho * math.cos(phi), rho * math.sin(phi)
        if not in_delta((u, v)) or u <= 0.0 or v <= 0.0:
            continue
        u, v = _newton_polish(p, u, v, phi)
        res = abs(full_field(p, (u, v))[0])
        max_res = max(max_res, res)
        phis.append(phi)
        pts.append((u, v))
    if max_res > TOL_NULL:
        raise ArithmeticError(
            f"branch {branch} residual {max_res:.3e} exceeds {TOL_NULL:.0e}"
        )
    return BranchCurve(
        branch=branch, points=tuple(pts), parameters=tuple(phis), max_residual=max_res
    )


def theta0_parabola_value(p: Params, u: float) -> float:
    """Leading-order height of the theta = 0 growth nullcline at abscissa u."""
    return -(p.eps / p.beta) * u * (p.alpha * u + 1.0 - p.alpha)


def _theta0_exact_root(p: Params, u: float) -> float:
    """Positive root of the exact quadratic (in v) for the theta = 0 case.

    With theta = 0, u' = 0 away from the v-axis is equivalent to
    eps*alpha*v**2 + v*(2*eps*alpha*u + beta - eps*alpha + eps)
    + eps*alpha*u**2 - eps*u*(alpha-1) = 0, whose admissible root is the
    positive one (the constant term is negative inside the branch span).
    """
    a = p.eps * p.alpha
    b = 2.0 * p.eps * p.alpha * u + p.beta - p.eps * p.alpha + p.eps
    c = p.eps * p.alpha * u * u - p.eps * u * (p.alpha - 1.0)
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        raise ArithmeticError(f"no real nullcline height at u={u}")
    # b > 0 throughout the relevant regime, so the admissible root is
    # computed cancellation-free via the conjugate form.
    return 2.0 * c / (-b - math.sqrt(disc)) if c != 0.0 else 0.0


def theta0_parabola(p: Params, n: int = 200) -> BranchCurve:
    """The theta = 0 growth nullcline sampled over u in [0, 1 - 1/alpha].

    Emitted points are the exact quadratic roots (so their residual is at
    floating noise); they differ from the plain parabola by O(eps**2).
    """
    if p.theta != 0.0:
        raise ValueError("the parabola form requires theta = 0")
    if p.alpha <= 1.0:
        raise ValueError("the parabola leaves the triangle for alpha <= 1")
    if n < 2:
        raise ValueError(f"need at least 2 samples, got {n}")
    u_hi = 1.0 - 1.0 / p.alpha
    us, pts = [], []
    max_res = 0.0
    for i in range(n):
        u = u_hi * (i + 1) / n  # skip u = 0 where the curve meets the axis
        v = _theta0_exact_root(p, u)
        max_res = max(max_res, abs(full_field(p, (u, v))[0]))
        us.append(u)
        pts.append((u, v))
    if max_res > TOL_NULL:
        raise ArithmeticError(
            f"parabola residual {max_res:.3e} exceeds {TOL_NULL:.0e}"
        )
    return BranchCurve(
        branch="theta0-parabola",
        points=tuple(pts),
        parameters=tuple(us),
        max_residual=max_res,
    )
