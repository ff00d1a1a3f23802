"""Closed-form equilibria, stability reports, and the infection-rate sweep.

The endemic state only exists inside a window of infection rates of width
O(eps): beta must exceed d + eps (so the infection can invade) but stay
below d + eps*alpha_star (beyond which the endemic state collapses onto the
extinction point).  Both window edges are transcritical bifurcations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import SingularOriginError, State, full_field, in_delta
from .params import Params

#: Eigenvalue real parts smaller than this are reported non-hyperbolic
#: rather than classified; the eps**2-scale spectra near the bifurcation
#: edges make an explicit tolerance policy necessary.
TOL_HYP = 1e-12

#: Residual bound below which a state is accepted as an equilibrium.
EQUILIBRIUM_RESIDUAL = 1e-8


class NonEquilibriumError(ValueError):
    """A state handed to the classifier is not an equilibrium."""


@dataclass(frozen=True)
class ReproductionNumbers:
    """Threshold quantities: infection (r0), demography (rd), and the
    upper edge alpha_star of the endemic window in k = (beta-d)/eps."""

    r0: float
    rd: float
    alpha_star: float


def reproduction_numbers(p: Params) -> ReproductionNumbers:
    ratio = p.eps * p.theta / (p.d + p.eps)
    denom = 1.0 - p.alpha * ratio
    if denom <= 0.0:
        raise ValueError(
            "alpha*eps*theta/(d+eps) must stay below 1 for the endemic "
            f"window to be defined (got denominator {denom})"
        )
    return ReproductionNumbers(
        r0=p.beta / (p.d + p.eps),
        rd=p.alpha - 1.0,
        alpha_star=p.alpha * (1.0 - ratio) / denom,
    )


def dfe(p: Params) -> State | None:
    """Infection-free equilibrium (1 - 1/alpha, 0); absent unless alpha > 1."""
    if p.alpha <= 1.0:
        return None
    return (1.0 - 1.0 / p.alpha, 0.0)


def ee_exact(p: Params) -> State | None:
    """Endemic equilibrium from its closed form, or None outside the window.

    The returned state satisfies v = u*(r0 - 1) exactly and zeroes the full
    field to floating precision.
    """
    if p.alpha <= 1.0:
        return None
    numbers = reproduction_numbers(p)
    k = p.k
    if not (1.0 < k < numbers.alpha_star):
        return None
    u = (1.0 / numbers.r0) * (
        1.0
        - (p.beta - p.d)
        / (p.eps * p.alpha)
        / (1.0 - p.theta + p.theta * p.beta / (p.d + p.eps))
    )
    return (u, u * (numbers.r0 - 1.0))


def ee_expansion(p: Params) -> State:
    """First order in eps of the endemic equilibrium.

    The u-coordinate is the expansion 1 - k/alpha + eps*(k-1)*(k+theta*k-alpha)
    / (alpha*d); the v-coordinate reuses the exact nullcline slope
    v = u*(r0 - 1), which agrees with the eps*(1-k/alpha)*(k-1)/d expansion
    to first order while keeping the O(eps**2) remainder small.
    """
    numbers = reproduction_numbers(p)
    k = p.k
    if p.alpha <= 1.0 or not (1.0 < k < numbers.alpha_star):
        raise ValueError(
            "endemic expansion requires alpha > 1 and 1 < k < alpha_star"
        )
    u = 1.0 - k / p.alpha + p.eps * (k - 1.0) / (p.alpha * p.d) * (
        k + p.theta * k - p.alpha
    )
    return (u, u * (numbers.r0 - 1.0))


def jacobian(p: Params, s: State) -> np.ndarray:
    """Analytic Jacobian of the full field.

    Derived by differentiating the field directly; cross-checked against
    central finite differences in the test suite.
    """
    u, v = s
    tot = u + v
    if tot == 0.0:
        raise SingularOriginError("Jacobian is undefined at u + v = 0")
    ea = p.eps * p.alpha
    frac_u = u / tot
    frac_v = v / tot
    j11 = ea * (1.0 - tot) - ea * (u + p.theta * v) - p.eps - p.beta * frac_v**2
    j12 = ea * p.theta * (1.0 - tot) - ea * (u + p.theta * v) - p.beta * frac_u**2
    j21 = p.beta * frac_v**2
    j22 = p.beta * frac_u**2 - p.d - p.eps
    return np.array([[j11, j12], [j21, j22]], dtype=float)


@dataclass(frozen=True)
class EquilibriumReport:
    location: State
    jacobian: np.ndarray
    eigenvalues: tuple[complex, complex]
    eigenvectors: tuple[tuple[complex, complex], tuple[complex, complex]]
    kind: str
    exists_in_delta: bool


def _eig2(matrix: np.ndarray) -> tuple[tuple[complex, complex], tuple]:
    """Eigen-decomposition of a real 2x2 matrix via the quadratic formula."""
    a, b = float(matrix[0, 0]), float(matrix[0, 1])
    c, d_ = float(matrix[1, 0]), float(matrix[1, 1])
    tr = a + d_
    det = a * d_ - b * c
    disc = tr * tr - 4.0 * det
    if disc >= 0.0:
        root = math.sqrt(disc)
        lams = ((tr + root) / 2.0 + 0.0j, (tr - root) / 2.0 + 0.0j)
    else:
        root = math.sqrt(-disc)
        lams = (complex(tr / 2.0, root / 2.0), complex(tr / 2.0, -root / 2.0))

    def eigvec(lam: complex) -> tuple[complex, complex]:
        cand1 = (b, lam - a)
        cand2 = (lam - d_, c)
        vec = cand1 if abs(cand1[0]) + abs(cand1[1]) >= abs(cand2[0]) + abs(cand2[1]) else cand2
        norm = math.hypot(abs(vec[0]), abs(vec[1]))
        if norm == 0.0:
            return (1.0 + 0.0j, 0.0j)
        return (vec[0] / norm, vec[1] / norm)

    return lams, (eigvec(lams[0]), eigvec(lams[1]))


def _kind_from_eigenvalues(lams: tuple[complex, complex], tol: float) -> str:
    re1, re2 = lams[0].real, lams[1].real
    if abs(re1) < tol or abs(re2) < tol:
        return "non-hyperbolic"
    if re1 < 0.0 and re2 < 0.0:
        return "sink-focus" if lams[0].imag != 0.0 else "sink-node"
    if re1 > 0.0 and re2 > 0.0:
        return "source-focus" if lams[0].imag != 0.0 else "source-node"
    return "saddle"


def classify_equilibrium(p: Params, s: State, tol_hyp: float = TOL_HYP) -> EquilibriumReport:
    """Stability report for an equilibrium of the full field.

    The state must zero the field to within ``EQUILIBRIUM_RESIDUAL``; the
    origin is rejected because linearization does not apply there (its local
    structure is recovered by the blow-up charts instead).
    """
    u, v = s
    if u + v == 0.0:
        raise SingularOriginError(
            "the extinction state cannot be classified by linearization"
        )
    du, dv = full_field(p, s)
    residual = max(abs(du), abs(dv))
    if residual > EQUILIBRIUM_RESIDUAL:
        raise NonEquilibriumError(
            f"state {s} has field residual {residual:.3e} "
            f"(> {EQUILIBRIUM_RESIDUAL:.0e})"
        )
    jac = jacobian(p, s)
    lams, vecs = _eig2(jac)
    return EquilibriumReport(
        location=(float(u), float(v)),
        jacobian=jac,
        eigenvalues=lams,
        eigenvectors=vecs,
        kind=_kind_from_eigenvalues(lams, tol_hyp),
        exists_in_delta=in_delta(s),
    )


@dataclass(frozen=True)
class BranchRecord:
    beta: float
    origin_status: str
    dfe_report: EquilibriumReport | None
    ee_report: EquilibriumReport | None


@dataclass(frozen=True)
class BifurcationBranch:
    betas: tuple[float, ...]
    records: tuple[BranchRecord, ...]
    transcritical: tuple[float | None, float | None]


def _bisect(fn, lo: float, hi: float, tol: float = 1e-10) -> float:
    flo = fn(lo)
    if flo == 0.0:
        return lo
    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        fmid = fn(mid)
        if fmid == 0.0:
            return mid
        if (flo < 0.0) == (fmid < 0.0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bifurcation_sweep(p: Params, beta_lo: float, beta_hi: float, n: int) -> BifurcationBranch:
    """Equilibrium branches over a grid of infection rates.

    Transcritical points are located by bracketing sign changes of the
    closed-form existence conditions on the grid and refining each bracket
    by bisection to 1e-10.
    """
    if not (0.0 < beta_lo < beta_hi):
        raise ValueError(f"invalid beta range [{beta_lo}, {beta_hi}]")
    if n < 3:
        raise ValueError(f"need at least 3 grid points, got {n}")
    from .regimes import classify_regime  # deferred: regimes imports this module

    betas = [beta_lo + (beta_hi - beta_lo) * i / (n - 1) for i in range(n)]
    records = []
    for beta in betas:
        pb = p.with_beta(beta)
        origin_status = classify_regime(pb).tag
        dfe_loc = dfe(pb)
        ee_loc = ee_exact(pb)
        records.append(
            BranchRecord(
                beta=beta,
                origin_status=origin_status,
                dfe_report=None if dfe_loc is None else classify_equilibrium(pb, dfe_loc),
                ee_report=None if ee_loc is None else classify_equilibrium(pb, ee_loc),
            )
        )

    def invasion(beta: float) -> float:
        return beta - (p.d + p.eps)

    def collapse(beta: float) -> float:
        pb = p.with_beta(beta)
        return pb.k - reproduction_numbers(pb).alpha_star

    found: list[float | None] = [None, None]
    if p.alpha > 1.0:
        for idx, cond in enumerate((invasion, collapse)):
            for left, right in zip(betas, betas[1:]):
                if cond(left) == 0.0:
                    found[idx] = left
                    break
                if (cond(left) < 0.0) != (cond(right) < 0.0):
                    found[idx] = _bisect(cond, left, right)
                    break
    return BifurcationBranch(
        betas=tuple(betas),
        records=tuple(records),
        transcritical=(found[0], found[1]),
    )
