"""Desingularization charts for the extinction state, in both regimes.

The extinction point is a nilpotent equilibrium of the polynomial auxiliary
system.  Two parameter regimes need different blow-ups:

* ``O1``   (beta - d of order one): a planar polar blow-up of the auxiliary
  system with two charts, K1 looking from above (u = r1*u1, v = r1) and K2
  looking from the right (u = r2, v = r2*v2).
* ``Oeps`` (beta = d + eps*k): first the rescaling v = eps*x (the ``pre``
  chart), then a blow-up of the pre system's origin in the three variables
  (u, x, eps) with charts K1 (x-direction), K2 (eps-direction), and K3
  (u-direction).

All chart vector fields are exact polynomial desingularizations: in
particular the K3 field, usually displayed only to leading order in r3, is
derived here by substituting the chart map into the pre system and dividing
by r3, so blow-down consistency holds to floating precision rather than to
O(r3).
Fields are written in plain arithmetic so they accept complex inputs; the
test suite exploits this for complex-step Jacobians.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .equilibria import _eig2
from .fields import aux_field
from .integrate import Event, IntegrationError, IntegrationOptions, integrate_generic
from .params import Params

__all__ = [
    "ChartEquilibrium",
    "ChartId",
    "ChartPoint",
    "RegimeMismatchError",
    "SectionConstants",
    "TransitReport",
    "TransitResult",
    "blow_down",
    "blowdown_consistency",
    "chart_equilibria",
    "chart_field",
    "chart_jacobian",
    "chart_point",
    "pre_field",
    "section_transit",
    "sphere_profile",
    "sphere_profile_argmax",
    "transition_map",
]

_CHARTS = {"O1": ("K1", "K2"), "Oeps": ("pre", "K1", "K2", "K3")}


class RegimeMismatchError(ValueError):
    """Chart requested outside its parameter regime."""


@dataclass(frozen=True)
class ChartId:
    regime: str  # "O1" | "Oeps"
    chart: str

    def __post_init__(self) -> None:
        if self.regime not in _CHARTS:
            raise ValueError(f"unknown regime {self.regime!r}")
        if self.chart not in _CHARTS[self.regime]:
            raise ValueError(
                f"chart {self.chart!r} not available in regime {self.regime!r}"
            )

    @property
    def dim(self) -> int:
        return 2 if self.regime == "O1" or self.chart == "pre" else 3


@dataclass(frozen=True)
class ChartPoint:
    chart: ChartId
    coords: tuple[float, ...]
    blowdown: tuple[float, ...]


def _check_coords(cid: ChartId, coords: tuple) -> None:
    if len(coords) != cid.dim:
        raise ValueError(
            f"chart {cid.regime}/{cid.chart} expects {cid.dim} coordinates, "
            f"got {len(coords)}"
        )


def blow_down(cid: ChartId, coords: tuple) -> tuple:
    """Image of chart coordinates under the defining substitution.

    O1 charts map to the phase plane (u, v); Oeps charts map to the
    rescaled space (u, x, eps) of the pre system ('pre' itself maps to
    (u, x) with the ambient eps implied).
    """
    _check_coords(cid, coords)
    if cid.regime == "O1":
        if cid.chart == "K1":
            r1, u1 = coords
            return (r1 * u1, r1)
        r2, v2 = coords
        return (r2, r2 * v2)
    if cid.chart == "pre":
        return tuple(coords)
    if cid.chart == "K1":
        r1, u1, e1 = coords
        return (r1 * u1, r1, r1 * e1)
    if cid.chart == "K2":
        r2, u2, x2 = coords
        return (r2 * u2, r2 * x2, r2)
    r3, x3, e3 = coords
    return (r3, r3 * x3, r3 * e3)


def chart_point(cid: ChartId, coords: tuple) -> ChartPoint:
    return ChartPoint(chart=cid, coords=tuple(coords), blowdown=blow_down(cid, coords))


def pre_field(p: Params, y: tuple, eps: float | None = None) -> tuple:
    """Slow-time field after the rescaling v = eps*x, with k held fixed.

    ``eps`` defaults to the physical value but may be any slice value: the
    blow-up treats it as a dynamic variable with k = (beta-d)/eps frozen.
    """
    u, x = y
    e = p.eps if eps is None else eps
    a, th, d, k = p.alpha, p.theta, p.d, p.k
    ex = e * x
    du = -d * u * x + a * (u + th * ex) * (1.0 - u - ex) * (u + ex) - u * (u + ex) - k * u * ex
    dx = -d * x * x + k * u * x - x * (u + ex)
    return du, dx


def _pre3(p: Params, y: tuple) -> tuple:
    du, dx = pre_field(p, y[:2], eps=y[2])
    return du, dx, 0.0 * y[2]


def chart_field(cid: ChartId, p: Params, coords: tuple) -> tuple:
    """Exact desingularized vector field of a blow-up chart."""
    _check_coords(cid, coords)
    a, th, b, d, e = p.alpha, p.theta, p.beta, p.d, p.eps
    if cid.regime == "O1":
        if cid.chart == "K1":
            r1, u1 = coords
            dr = -r1 * (d + e + (d - b + e) * u1)
            du = (1.0 + u1) * (
                a * e * th + (d - b + a * e) * u1 - a * e * r1 * (1.0 + u1) * (th + u1)
            )
            return dr, du
        r2, v2 = coords
        common = a * e * (1.0 + v2) * (1.0 + th * v2) * (r2 * v2 + r2 - 1.0)
        dr = r2 * (-common - b * v2 - e * (1.0 + v2))
        dv = v2 * (common + b * v2 + b - d * (1.0 + v2))
        return dr, dv

    k = p.k
    if cid.chart == "pre":
        return pre_field(p, coords)
    if cid.chart == "K1":
        r1, u1, e1 = coords
        rate = d + e1 * r1 - (k - 1.0) * u1
        s = e1 * r1 + u1
        du = s * (a * (1.0 - r1 * s) * (e1 * th * r1 + u1) - k * u1)
        return -r1 * rate, du, e1 * rate
    if cid.chart == "K2":
        r2, u2, x2 = coords
        s = u2 + r2 * x2
        du = (
            a * (u2 + th * r2 * x2) * s * (1.0 - r2 * s)
            - u2 * s
            - d * u2 * x2
            - k * r2 * u2 * x2
        )
        dx = x2 * ((k - 1.0) * u2 - d * x2 - r2 * x2)
        return 0.0 * r2, du, dx
    r3, x3, e3 = coords
    w = 1.0 + r3 * e3 * x3
    big = a * (1.0 + th * e3 * r3 * x3) * w * (1.0 - r3 * w)
    dr = r3 * (big - w - d * x3 - k * r3 * e3 * x3)
    dx = x3 * (k * w - big)
    de = e3 * (w + d * x3 + k * r3 * e3 * x3 - big)
    return dr, dx, de


def chart_jacobian(
    cid: ChartId, p: Params, coords: tuple, axes: tuple[int, ...] | None = None
) -> list[list[float]]:
    """Jacobian of the chart field by complex-step differentiation.

    The chart fields are polynomial, so the complex step is exact to
    floating precision.  ``axes`` restricts to an invariant slice.
    """
    if axes is None:
        axes = tuple(range(cid.dim))
    h = 1e-20
    cols = []
    for j in axes:
        perturbed = tuple(
            c + (1j * h if idx == j else 0.0) for idx, c in enumerate(coords)
        )
        deriv = chart_field(cid, p, perturbed)
        cols.append([deriv[i].imag / h for i in axes])
    return [[cols[j][i] for j in range(len(axes))] for i in range(len(axes))]


@dataclass(frozen=True)
class ChartEquilibrium:
    chart: ChartId
    label: str
    location: tuple[float, ...]
    slice_axes: tuple[int, ...]
    eigenvalues: tuple[complex, ...]
    eigenvectors: tuple[tuple[complex, ...], ...]
    hyperbolic: bool
    in_region: bool


def _slice_eigen(
    cid: ChartId, p: Params, location: tuple, axes: tuple[int, ...], closed: tuple
) -> tuple[tuple, tuple]:
    """Pair closed-form eigenvalues with eigenvectors of the numeric Jacobian."""
    jac = chart_jacobian(cid, p, location, axes)
    lams_num, vecs_num = _eig2(np.array(jac, dtype=float))
    ordered_vecs = []
    for lam in closed:
        dists = [abs(lam - ln) for ln in lams_num]
        ordered_vecs.append(vecs_num[dists.index(min(dists))])
    return tuple(closed), tuple(ordered_vecs)


def _mk_eq(cid, p, label, location, axes, closed, in_region=True, hyp_tol=1e-12):
    lams, vecs = _slice_eigen(cid, p, location, axes, closed)
    hyperbolic = all(abs(l.real) > hyp_tol for l in lams)
    return ChartEquilibrium(
        chart=cid,
        label=label,
        location=tuple(float(c) for c in location),
        slice_axes=axes,
        eigenvalues=lams,
        eigenvectors=vecs,
        hyperbolic=hyperbolic,
        in_region=in_region,
    )


def _quad_eigs(trace: float, det: float) -> tuple[complex, complex]:
    disc = trace * trace - 4.0 * det
    if disc >= 0.0:
        root = math.sqrt(disc)
        return ((trace + root) / 2.0 + 0.0j, (trace - root) / 2.0 + 0.0j)
    root = math.sqrt(-disc)
    return (complex(trace / 2.0, root / 2.0), complex(trace / 2.0, -root / 2.0))


def chart_equilibria(cid: ChartId, p: Params) -> list[ChartEquilibrium]:
    """Equilibria of a chart with closed-form locations and spectra.

    The eigenvalues stored are closed forms; eigenvectors come from the
    complex-step Jacobian on the equilibrium's invariant slice.  Degenerate
    parameter values are returned with the non-hyperbolic flag set instead
    of being forced into a generic classification.
    """
    a, th, b, d, e = p.alpha, p.theta, p.beta, p.d, p.eps
    out: list[ChartEquilibrium] = []
    if cid.regime == "O1":
        if b - d - a * e <= 0.0:
            raise RegimeMismatchError(
                "O1 charts require beta - d - alpha*eps > 0 "
                f"(got {b - d - a * e:.3e})"
            )
        if cid.chart == "K1":
            u10 = e * a * th / (b - d - a * e)
            lam_r = -(d + e + (d + e - b) * u10)
            lam_u = (1.0 + u10) * (d + a * e - b)
            out.append(
                _mk_eq(cid, p, "p1", (0.0, u10), (0, 1), (lam_r + 0j, lam_u + 0j))
            )
            out.append(
                _mk_eq(
                    cid, p, "negative-root", (0.0, -1.0), (0, 1),
                    _neg_root_eigs_o1k1(p), in_region=False,
                )
            )
            return out
        lam_r = e * (a - 1.0)
        lam_v = b - d - a * e
        out.append(_mk_eq(cid, p, "p2", (0.0, 0.0), (0, 1), (lam_r + 0j, lam_v + 0j)))
        if th > 0.0:
            v22 = (b - d - a * e) / (a * e * th)
            # Same point as p1 seen from chart K2 (u1_0 * v2_2 = 1).
            jac = chart_jacobian(cid, p, (0.0, v22), (0, 1))
            tr = jac[0][0] + jac[1][1]
            det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0]
            out.append(_mk_eq(cid, p, "p1", (0.0, v22), (0, 1), _quad_eigs(tr, det)))
        out.append(
            _mk_eq(
                cid, p, "negative-root", (0.0, -1.0), (0, 1),
                _neg_root_eigs_o1k2(p), in_region=False,
            )
        )
        return out

    k = p.k
    if not k > 0.0:
        raise RegimeMismatchError(f"Oeps charts require beta > d (k = {k:.3g})")
    if cid.chart == "pre":
        # Equilibria of the eps = 0 slice of the pre system.
        out.append(
            ChartEquilibrium(
                chart=cid,
                label="origin",
                location=(0.0, 0.0),
                slice_axes=(0, 1),
                eigenvalues=(0.0j, 0.0j),
                eigenvectors=((1.0 + 0j, 0.0j), (0.0j, 1.0 + 0j)),
                hyperbolic=False,
                in_region=True,
            )
        )
        if a > 1.0:
            lam1 = 2.0 - a - 1.0 / a
            lam2 = (a - 1.0) * (k - 1.0) / a
            out.append(
                _mk_eq_eps0(cid, p, "dfe", (1.0 - 1.0 / a, 0.0), (lam1 + 0j, lam2 + 0j))
            )
        if a > 1.0 and 1.0 < k < a:
            loc = (1.0 - k / a, (k - 1.0) * (a - k) / (a * d))
            tr = -((a - k) ** 2) / a
            det = (a - k) ** 3 * (k - 1.0) / (a * a)
            out.append(_mk_eq_eps0(cid, p, "ee", loc, _quad_eigs(tr, det)))
        return out
    if cid.chart == "K1":
        # {eps1 = 0} slice: nilpotent origin plus the endemic point.
        out.append(
            ChartEquilibrium(
                chart=cid,
                label="origin",
                location=(0.0, 0.0, 0.0),
                slice_axes=(0, 1),
                eigenvalues=(-d + 0j, 0.0j),
                eigenvectors=((1.0 + 0j, 0.0j), (0.0j, 1.0 + 0j)),
                hyperbolic=False,
                in_region=True,
            )
        )
        if 1.0 < k < a:
            loc = ((a - k) * (k - 1.0) / (a * d), d / (k - 1.0), 0.0)
            jac = chart_jacobian(cid, p, loc, (0, 1))
            tr = jac[0][0] + jac[1][1]
            det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0]
            out.append(_mk_eq(cid, p, "ee", loc, (0, 1), _quad_eigs(tr, det)))
        return out
    if cid.chart == "K2":
        out.append(
            ChartEquilibrium(
                chart=cid,
                label="origin",
                location=(0.0, 0.0, 0.0),
                slice_axes=(1, 2),
                eigenvalues=(0.0j, 0.0j),
                eigenvectors=((1.0 + 0j, 0.0j), (0.0j, 1.0 + 0j)),
                hyperbolic=False,
                in_region=True,
            )
        )
        return out
    # K3, {eps3 = 0} slice.
    out.append(
        _mk_eq(
            cid, p, "E0", (0.0, 0.0, 0.0), (0, 1), ((a - 1.0) + 0j, (k - a) + 0j)
        )
    )
    if a > 1.0:
        out.append(
            _mk_eq(
                cid, p, "E1", ((a - 1.0) / a, 0.0, 0.0), (0, 1),
                ((1.0 - a) + 0j, (k - 1.0) + 0j),
            )
        )
    if 1.0 < k < a:
        loc = ((a - k) / a, (k - 1.0) / d, 0.0)
        out.append(
            _mk_eq(cid, p, "E2", loc, (0, 1), _quad_eigs(-(a - k), (a - k) * (k - 1.0)))
        )
    return out


def _mk_eq_eps0(cid: ChartId, p: Params, label: str, loc2: tuple, closed: tuple):
    """Helper for pre-chart equilibria (Jacobian of the eps = 0 slice)."""
    h = 1e-20
    cols = []
    for j in range(2):
        pert = tuple(c + (1j * h if i == j else 0.0) for i, c in enumerate(loc2))
        deriv = pre_field(p, pert, eps=0.0)
        cols.append([deriv[i].imag / h for i in range(2)])
    jac = np.array([[cols[j][i] for j in range(2)] for i in range(2)], dtype=float)
    lams_num, vecs_num = _eig2(jac)
    vecs = []
    for lam in closed:
        dists = [abs(lam - ln) for ln in lams_num]
        vecs.append(vecs_num[dists.index(min(dists))])
    hyperbolic = all(abs(l.real) > 1e-12 for l in closed)
    return ChartEquilibrium(
        chart=cid,
        label=label,
        location=(float(loc2[0]), float(loc2[1])),
        slice_axes=(0, 1),
        eigenvalues=tuple(closed),
        eigenvectors=tuple(vecs),
        hyperbolic=hyperbolic,
        in_region=True,
    )


def _neg_root_eigs_o1k1(p: Params) -> tuple[complex, complex]:
    jac = chart_jacobian(ChartId("O1", "K1"), p, (0.0, -1.0), (0, 1))
    return _quad_eigs(jac[0][0] + jac[1][1], jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0])


def _neg_root_eigs_o1k2(p: Params) -> tuple[complex, complex]:
    jac = chart_jacobian(ChartId("O1", "K2"), p, (0.0, -1.0), (0, 1))
    return _quad_eigs(jac[0][0] + jac[1][1], jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0])


def transition_map(src: ChartId, dst: ChartId, coords: tuple) -> tuple:
    """Exact coordinate change between overlapping charts.

    Raises when the dividing coordinate vanishes (outside the overlap).
    """
    _check_coords(src, coords)
    if src.regime != dst.regime:
        raise ValueError("transition maps connect charts of the same regime")
    key = (src.chart, dst.chart)
    if src.regime == "O1":
        if key == ("K1", "K2"):
            r1, u1 = coords
            _nonzero(u1, "u1")
            return (r1 * u1, 1.0 / u1)
        if key == ("K2", "K1"):
            r2, v2 = coords
            _nonzero(v2, "v2")
            return (r2 * v2, 1.0 / v2)
        raise ValueError(f"no transition {key} in regime O1")
    if key == ("K1", "K2"):
        r1, u1, e1 = coords
        _nonzero(e1, "eps1")
        return (r1 * e1, u1 / e1, 1.0 / e1)
    if key == ("K2", "K1"):
        r2, u2, x2 = coords
        _nonzero(x2, "x2")
        return (r2 * x2, u2 / x2, 1.0 / x2)
    if key == ("K1", "K3"):
        r1, u1, e1 = coords
        _nonzero(u1, "u1")
        return (r1 * u1, 1.0 / u1, e1 / u1)
    if key == ("K3", "K1"):
        r3, x3, e3 = coords
        _nonzero(x3, "x3")
        return (r3 * x3, 1.0 / x3, e3 / x3)
    if key == ("K2", "K3"):
        r2, u2, x2 = coords
        _nonzero(u2, "u2")
        return (r2 * u2, x2 / u2, 1.0 / u2)
    if key == ("K3", "K2"):
        r3, x3, e3 = coords
        _nonzero(e3, "eps3")
        return (r3 * e3, 1.0 / e3, x3 / e3)
    raise ValueError(f"no transition {key} in regime Oeps")


def _nonzero(value: float, name: str) -> None:
    if value == 0.0:
        raise ValueError(f"transition undefined where {name} = 0 (outside overlap)")


def blowdown_consistency(cid: ChartId, p: Params, coords: tuple) -> float:
    """Relative residual of pushing the chart field down through the blow-up.

    The chart field, pushed forward by the analytic Jacobian of the chart
    substitution and multiplied by the chart's positive desingularization
    factor, must reproduce the auxiliary field (regime O1) or the pre-system
    field (regime Oeps) at the image point.  Returns the max relative
    deviation across components.
    """
    _check_coords(cid, coords)
    deriv = chart_field(cid, p, coords)
    if cid.regime == "O1":
        if cid.chart == "K1":
            r1, u1 = coords
            _positive(r1, "r1")
            push = (u1 * deriv[0] + r1 * deriv[1], deriv[0])
            factor = r1
        else:
            r2, v2 = coords
            _positive(r2, "r2")
            push = (deriv[0], v2 * deriv[0] + r2 * deriv[1])
            factor = r2
        target = aux_field(p, blow_down(cid, coords))
    elif cid.chart == "pre":
        u, x = coords
        e = p.eps
        push = (deriv[0], e * deriv[1])
        factor = e
        target = aux_field(p, (u, e * x))
    else:
        if cid.chart == "K1":
            r1, u1, e1 = coords
            _positive(r1, "r1")
            dr, du, de = deriv
            push = (u1 * dr + r1 * du, dr, e1 * dr + r1 * de)
            factor = r1
        elif cid.chart == "K2":
            r2, u2, x2 = coords
            _positive(r2, "r2")
            dr, du, dx = deriv
            push = (u2 * dr + r2 * du, x2 * dr + r2 * dx, dr)
            factor = r2
        else:
            r3, x3, e3 = coords
            _positive(r3, "r3")
            dr, dx, de = deriv
            push = (dr, x3 * dr + r3 * dx, e3 * dr + r3 * de)
            factor = r3
        target = _pre3(p, blow_down(cid, coords))
    scale = max(max(abs(t) for t in target), 1e-300)
    return max(abs(factor * a - t) for a, t in zip(push, target)) / scale


def _positive(value: float, name: str) -> None:
    if value <= 0.0:
        raise ValueError(f"blow-down requires {name} > 0, got {value}")


def sphere_profile_argmax(p: Params) -> float:
    """Location of the unique maximum of the sphere profile: d/(k-1)."""
    _require_profile_regime(p)
    return p.d / (p.k - 1.0)


def sphere_profile(
    p: Params, u1: float, ref: tuple[float, float] | None = None
) -> float:
    """First integral of the Oeps-K1 flow on the blown-up sphere {r1 = 0}.

    eps1(u1) = A * u1**(-(k-1)/(alpha-k)) * exp(-d/((alpha-k)*u1)), with the
    constant A fixed so the profile passes through ``ref`` (default: value 1
    at the maximum).  Vanishes in both limits u1 -> 0+ and u1 -> inf.
    """
    _require_profile_regime(p)
    if u1 <= 0.0:
        raise ValueError(f"u1 must be positive, got {u1}")
    a, d, k = p.alpha, p.d, p.k
    expo = -(k - 1.0) / (a - k)

    def raw(uu: float) -> float:
        return uu**expo * math.exp(-d / ((a - k) * uu))

    if ref is None:
        ref = (sphere_profile_argmax(p), 1.0)
    u_ref, e_ref = ref
    if u_ref <= 0.0 or e_ref <= 0.0:
        raise ValueError("reference point must have positive coordinates")
    return e_ref * raw(u1) / raw(u_ref)


def _require_profile_regime(p: Params) -> None:
    if not 1.0 < p.k < p.alpha:
        raise RegimeMismatchError(
            f"sphere profile requires 1 < k < alpha (k={p.k:.4g}, alpha={p.alpha})"
        )


@dataclass(frozen=True)
class SectionConstants:
    """Section levels; no canonical numeric values exist, all configurable."""

    delta: float = 0.1
    delta2: float = 0.1
    delta3: float = 0.1
    delta4: float = 0.1
    rho: float = 0.01
    rho3: float = 0.01

    def __post_init__(self) -> None:
        for name in ("delta", "delta2", "delta3", "delta4", "rho", "rho3"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class TransitResult:
    start_chart: str
    start: tuple[float, ...]
    itinerary: tuple[str, ...]
    success: bool
    reason: str | None = None


@dataclass(frozen=True)
class TransitReport:
    regime: str
    results: tuple[TransitResult, ...]

    @property
    def all_succeeded(self) -> bool:
        return all(r.success for r in self.results)


def _coord_event(index: int, level: float, direction: int, name: str, dim: int) -> Event:
    normal = tuple(1.0 if i == index else 0.0 for i in range(dim))
    return Event.hyperplane(normal, level, direction=direction, terminal=True, name=name)


def _run_chart(cid, p, start, events, horizon, rel_tol=1e-9, abs_tol=1e-12, max_step=math.inf):
    opts = IntegrationOptions(
        rel_tol=rel_tol,
        abs_tol=abs_tol,
        t_max=horizon,
        max_step=max_step,
        events=tuple(events),
    )
    rhs = lambda t, y: chart_field(cid, p, y)
    return integrate_generic(rhs, start, opts)


def section_transit(
    p: Params,
    regime: str,
    samples: list[tuple] | None = None,
    *,
    constants: SectionConstants | None = None,
    horizon: float = 1e5,
) -> TransitReport:
    """Track orbits through the chart itineraries of the blow-up analysis.

    Regime O1: orbits entering chart K2 near the blown-up sphere reach the
    exit section {v2 = delta} in finite time, cross to chart K1 (where the
    entry section is {u1 = 1/delta}), and converge to the sink p1; the
    radial coordinate contracts beyond the exit section.

    Regime Oeps: orbits entering chart K1 through {r1 = rho} leave either
    toward K3 directly ({u1 = 1/delta3}) or through K2 ({eps1 = 1/delta2},
    then {u2 = 1/delta4}), and in all cases reach the exit section
    {r3 = rho3} of chart K3.
    """
    cons = constants or SectionConstants()
    if regime == "O1":
        return _transit_o1(p, samples, cons, horizon)
    if regime == "Oeps":
        return _transit_oeps(p, samples, cons, horizon)
    raise ValueError(f"unknown regime {regime!r}")


def _transit_o1(p, samples, cons, horizon) -> TransitReport:
    k2 = ChartId("O1", "K2")
    k1 = ChartId("O1", "K1")
    eqs = {eq.label: eq for eq in chart_equilibria(k1, p)}
    p1 = eqs["p1"].location
    if samples is None:
        samples = [(r2, cons.delta / 10.0) for r2 in (0.002, 0.005, 0.01)]
    results = []
    for start in samples:
        itinerary: list[str] = ["Sigma2_entry"]
        try:
            exit_ev = _coord_event(1, cons.delta, +1, "Sigma2_ex", 2)
            traj, _ = _run_chart(k2, p, start, [exit_ev], horizon)
            if traj.terminated != "Sigma2_ex":
                results.append(
                    TransitResult("K2", tuple(start), tuple(itinerary), False,
                                  "never reached {v2 = delta}")
                )
                continue
            itinerary.append("Sigma2_ex")
            hit = traj.final_state
            # Contraction beyond the exit section: r2 must shrink from here.
            probe, _ = _run_chart(
                k2, p, hit, [_coord_event(1, 2.0 * cons.delta, +1, "probe", 2)], horizon
            )
            r2_series = [s[0] for s in probe.states]
            if not all(b < a for a, b in zip(r2_series, r2_series[1:])):
                results.append(
                    TransitResult("K2", tuple(start), tuple(itinerary), False,
                                  "r2 failed to contract beyond the exit section")
                )
                continue
            itinerary.append("r2-contracting")
            # Hand off to K1 and run to the sink p1.
            k1_start = transition_map(k2, k1, hit)
            arrive = Event.ball(p1, 1e-4, terminal=True, name="p1")
            traj1, _ = _run_chart(k1, p, k1_start, [arrive], horizon)
            if traj1.terminated != "p1":
                results.append(
                    TransitResult("K2", tuple(start), tuple(itinerary), False,
                                  "did not converge to p1 in chart K1")
                )
                continue
            itinerary.append("p1")
            results.append(TransitResult("K2", tuple(start), tuple(itinerary), True))
        except (IntegrationError, ValueError) as exc:
            results.append(
                TransitResult("K2", tuple(start), tuple(itinerary), False, str(exc))
            )
    return TransitReport(regime="O1", results=tuple(results))


def _transit_oeps(p, samples, cons, horizon) -> TransitReport:
    k1 = ChartId("Oeps", "K1")
    k2 = ChartId("Oeps", "K2")
    k3 = ChartId("Oeps", "K3")
    if samples is None:
        # Tuned for the reference set (alpha=4, k=2, d=0.1): the first three
        # leave chart K1 toward K3 directly, the last three detour through K2.
        samples = [
            (cons.rho, 0.3, 0.5),
            (cons.rho, 1.0, 1.0),
            (cons.rho, 3.0, 0.1),
            (cons.rho, 0.05, 9.0),
            (cons.rho, 0.03, 7.0),
            (cons.rho, 0.02, 6.0),
        ]
    results = []
    for start in samples:
        itinerary: list[str] = ["Sigma_in"]
        try:
            to_k3 = _coord_event(1, 1.0 / cons.delta3, +1, "Sigma_1to3_out", 3)
            to_k2 = _coord_event(2, 1.0 / cons.delta2, +1, "Sigma_1to2_out", 3)
            traj, _ = _run_chart(k1, p, start, [to_k3, to_k2], horizon)
            if traj.terminated is None:
                results.append(
                    TransitResult("K1", tuple(start), tuple(itinerary), False,
                                  "stalled in chart K1")
                )
                continue
            itinerary.append(traj.terminated)
            state = traj.final_state
            if traj.terminated == "Sigma_1to2_out":
                k2_start = transition_map(k1, k2, state)
                out2 = _coord_event(1, 1.0 / cons.delta4, +1, "Sigma2_out", 3)
                traj2, _ = _run_chart(k2, p, k2_start, [out2], horizon)
                if traj2.terminated != "Sigma2_out":
                    results.append(
                        TransitResult("K1", tuple(start), tuple(itinerary), False,
                                      "stalled in chart K2")
                    )
                    continue
                itinerary.append("Sigma2_out")
                k3_start = transition_map(k2, k3, traj2.final_state)
                itinerary.append("Sigma_2to3_in")
            else:
                k3_start = transition_map(k1, k3, state)
                itinerary.append("Sigma_1to3_in")
            if k3_start[0] >= cons.rho3:
                # The handoff already lies outside the exit section: the
                # orbit has left the blow-up neighborhood in the u-direction.
                itinerary.append("Sigma3_out")
                results.append(
                    TransitResult("K1", tuple(start), tuple(itinerary), True,
                                  "entered K3 beyond the exit section")
                )
                continue
            out3 = _coord_event(0, cons.rho3, +1, "Sigma3_out", 3)
            traj3, _ = _run_chart(k3, p, k3_start, [out3], horizon)
            if traj3.terminated != "Sigma3_out":
                results.append(
                    TransitResult("K1", tuple(start), tuple(itinerary), False,
                                  "stalled in chart K3")
                )
                continue
            itinerary.append("Sigma3_out")
            results.append(TransitResult("K1", tuple(start), tuple(itinerary), True))
        except (IntegrationError, ValueError) as exc:
            results.append(
                TransitResult("K1", tuple(start), tuple(itinerary), False, str(exc))
            )
    return TransitReport(regime="Oeps", results=tuple(results))
