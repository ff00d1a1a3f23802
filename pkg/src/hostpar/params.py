"""Parameter containers for the two-timescale host-parasite model.

The model lives on the phase plane of susceptible/infected host fractions
``(u, v)`` and carries five constants: a dimensionless growth factor
``alpha``, the relative fecundity ``theta`` of infected hosts, the infection
rate ``beta``, the parasite-induced death rate ``d``, and the small
parasite-independent death rate ``eps`` that sets the slow timescale.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

# Upper bound accepted for the slow rate.  Asymptotic statements are only
# exercised by the test suite for eps <= 5e-3; larger values are allowed but
# increasingly far from the two-timescale regime.
EPS_MAX = 0.1


def _require_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class Params:
    """Normalized model constants.

    ``alpha`` is the product of the per-capita birth factor and the carrying
    capacity, so the plane coordinates are host fractions of capacity.
    """

    alpha: float
    theta: float
    beta: float
    d: float
    eps: float

    def __post_init__(self) -> None:
        for name in ("alpha", "theta", "beta", "d", "eps"):
            _require_finite(name, getattr(self, name))
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError(f"theta must lie in [0, 1], got {self.theta}")
        if self.beta <= 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.d <= 0:
            raise ValueError(f"d must be positive, got {self.d}")
        if not 0.0 < self.eps <= EPS_MAX:
            raise ValueError(
                f"eps must lie in (0, {EPS_MAX}], got {self.eps}"
            )

    @property
    def k(self) -> float:
        """Infection-rate excess in slow units, (beta - d) / eps."""
        return (self.beta - self.d) / self.eps

    def with_beta(self, beta: float) -> "Params":
        return replace(self, beta=beta)

    def with_eps(self, eps: float) -> "Params":
        return replace(self, eps=eps)


@dataclass(frozen=True)
class PhysicalParams:
    """Unnormalized constants: per-capita birth factor and carrying capacity."""

    a: float
    m: float
    theta: float
    beta: float
    d: float
    eps: float

    def __post_init__(self) -> None:
        for name in ("a", "m"):
            _require_finite(name, getattr(self, name))
        if self.a <= 0:
            raise ValueError(f"a must be positive, got {self.a}")
        if self.m <= 0:
            raise ValueError(f"m must be positive, got {self.m}")


def normalize(phys: PhysicalParams) -> Params:
    """Rescale host counts by the carrying capacity; alpha = a * m."""
    return Params(
        alpha=phys.a * phys.m,
        theta=phys.theta,
        beta=phys.beta,
        d=phys.d,
        eps=phys.eps,
    )


#: Canonical parameter sets for the named reference experiments.
PRESETS: dict[str, Params] = {
    "fig4": Params(alpha=4.0, theta=0.5, beta=0.075, d=0.1, eps=0.001),
    "fig5a": Params(alpha=4.0, theta=0.5, beta=0.5, d=0.1, eps=0.005),
    "fig5b": Params(alpha=4.0, theta=0.5, beta=0.5, d=0.3, eps=0.005),
    "fig6": Params(alpha=4.0, theta=0.5, beta=0.11, d=0.1, eps=0.005),
    "fig7": Params(alpha=4.0, theta=0.5, beta=0.11, d=0.1, eps=0.005),
}

#: One representative parameter set per asymptotic regime of the classifier.
CASE_SETS: dict[str, Params] = {
    "case1": Params(alpha=0.5, theta=0.5, beta=0.075, d=0.1, eps=0.001),
    "case2": PRESETS["fig4"],
    "case3": Params(alpha=0.5, theta=0.5, beta=0.5, d=0.1, eps=0.005),
    "case4": PRESETS["fig5a"],
    "case5": PRESETS["fig7"],
}


def preset(name: str) -> Params:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(
            f"unknown preset {name!r}; available: {sorted(PRESETS)}"
        ) from None
