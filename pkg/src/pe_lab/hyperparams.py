"""Closed-form parameter calculators for the evolution loop.

All logarithms are natural unless the formula is written in base 2 (the
number of noise levels, ceil(log2(D/alpha)), is the only base-2 quantity).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .privacy import sigma_analytic_gaussian, sigma_for_composition

__all__ = [
    "ParameterError",
    "TheoremParams",
    "RunParams",
    "gamma_of_d",
    "variation_levels",
    "theorem2_params",
    "t_heuristic",
    "run_params",
    "gaussian_complexity_bound",
]

LN2 = math.log(2.0)


class ParameterError(ValueError):
    """A parameter setting violates the range the guarantees require."""


def gamma_of_d(d: int) -> float:
    """Per-step contraction rate of the multi-scale Gaussian variation API."""
    if d < 1:
        raise ValueError("dimension must be at least 1")
    return 1.0 / (8.0 * math.pi * ((math.sqrt(d) + LN2) ** 2 + LN2))


def variation_levels(D: float, alpha: float) -> int:
    """Number of noise scales: ceil(log2(D / alpha)), never negative."""
    if not (D > 0 and alpha > 0):
        raise ValueError("D and alpha must be positive")
    return max(0, math.ceil(math.log2(D / alpha)))


def _dmax(d: int) -> int:
    return max(d, 2)


@dataclass(frozen=True)
class TheoremParams:
    """The full parameter tuple of the convergence guarantee.

    ``t_raw`` is the value of the closed-form step count before rounding;
    it is negative at small n*eps (the guarantee is asymptotic), in which
    case T clamps to 1 and the raw value is kept for audit.
    """

    gamma: float
    alpha: float
    n_s: int
    T: int
    sigma: float
    derived_from: dict = field(repr=False)
    t_raw: float = 0.0
    n_s_real: float = 0.0
    levels: int = 0

    def __post_init__(self):
        if not (0 < self.gamma < 1):
            raise ParameterError("gamma must lie in (0, 1)")
        if self.n_s < 1 or self.T < 1:
            raise ParameterError("n_s and T must be at least 1")
        if not (0 < self.sigma < 1):
            n = self.derived_from.get("n", 0)
            eps = self.derived_from.get("eps", 0.0)
            min_n_eps = 4 * math.sqrt(
                self.T * math.log(1.25 / self.derived_from.get("delta", 1e-4))
            )
            raise ParameterError(
                f"noise scale sigma={self.sigma:.6g} is outside (0, 1): the budget "
                f"n*eps={n * eps:.6g} is too small for {self.T} compositions "
                f"(need n*eps > {min_n_eps:.6g})"
            )

    def as_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "alpha": self.alpha,
            "n_s": self.n_s,
            "T": self.T,
            "sigma": self.sigma,
            "t_raw": self.t_raw,
            "n_s_real": self.n_s_real,
            "levels": self.levels,
            **{f"in_{k}": v for k, v in self.derived_from.items()},
        }


def theorem2_params(n: int, eps: float, delta: float, d: int, D: float) -> TheoremParams:
    """Evaluate the closed-form parameter chain of the convergence theorem.

    Order: T first (clamped to at least 1; the raw value is reported), then
    sigma from the composition formula, then alpha = D * sigma^(1/max(d,2)),
    then n_s = ceil(sigma^-1 * (2*levels + 1)^(1/max(d,2) - 1)).
    """
    if n < 1 or not (eps > 0) or not (0 < delta < 1) or d < 1 or not (D > 0):
        raise ValueError("invalid inputs")
    g = gamma_of_d(d)
    m = _dmax(d)
    t_raw = (
        math.log(g * (n * eps) ** (1.0 / m) / (4.0 * math.sqrt(math.log(1.0 / delta))) ** (1.0 / m))
        / g
    )
    T = max(1, math.ceil(t_raw))
    sigma = sigma_for_composition(T, n, eps, delta)
    alpha = D * sigma ** (1.0 / m)
    levels = variation_levels(D, alpha)
    n_s_real = (1.0 / sigma) * (2 * levels + 1) ** (1.0 / m - 1.0)
    n_s = max(1, math.ceil(n_s_real))
    return TheoremParams(
        gamma=g,
        alpha=alpha,
        n_s=n_s,
        T=T,
        sigma=sigma,
        derived_from={"n": n, "eps": eps, "delta": delta, "d": d, "D": D},
        t_raw=t_raw,
        n_s_real=n_s_real,
        levels=levels,
    )


def t_heuristic(n: int, eps: float) -> int:
    """Practical step count ceil(2 * ln(n * eps)); requires n * eps > 1."""
    if n * eps <= 1:
        raise ParameterError("t_heuristic requires n * eps > 1")
    return math.ceil(2.0 * math.log(n * eps))


@dataclass(frozen=True)
class RunParams:
    """Parameters actually handed to an evolution run.

    T comes from the practical heuristic (or an override), sigma from the
    requested calibration route, and alpha / n_s from the theorem formulas
    evaluated at that sigma.
    """

    T: int
    sigma: float
    alpha: float
    n_s: int
    levels: int
    calibration: str
    sensitivity: float


def run_params(
    n: int,
    eps: float,
    delta: float,
    d: int,
    D: float,
    T: int | None = None,
    calibration: str = "analytic",
) -> RunParams:
    if T is None:
        T = t_heuristic(n, eps)
    if T < 1:
        raise ParameterError("T must be at least 1")
    sensitivity = math.sqrt(2.0) / n
    if calibration == "analytic":
        sigma = sigma_analytic_gaussian(eps, delta, sensitivity, T)
    elif calibration == "closed_form":
        sigma = sigma_for_composition(T, n, eps, delta)
    else:
        raise ValueError(f"unknown calibration route: {calibration!r}")
    m = _dmax(d)
    alpha = D * sigma ** (1.0 / m)
    alpha = min(alpha, D)  # sigma >= 1 would put the finest scale above D
    levels = variation_levels(D, alpha)
    n_s = max(1, math.ceil((1.0 / sigma) * (2 * levels + 1) ** (1.0 / m - 1.0)))
    return RunParams(
        T=T,
        sigma=sigma,
        alpha=alpha,
        n_s=n_s,
        levels=levels,
        calibration=calibration,
        sensitivity=sensitivity,
    )


def gaussian_complexity_bound(n: int, D: float, d: int) -> float:
    """Upper bound on the Gaussian complexity of the bounded-Lipschitz class.

    Three regimes: 9*sqrt(ln(2*sqrt(n)))*D/sqrt(n) in dimension 1,
    10*D*ln(2*sqrt(n))^(3/2)/sqrt(n) in dimension 2, and
    10*D*sqrt(ln(2*n^(1/d)*(d/2-1)^(2/d)))/(n^(1/d)*(d/2-1)^(2/d)) above.
    """
    if n < 1 or not (D > 0) or d < 1:
        raise ValueError("invalid inputs")
    if d == 1:
        return 9.0 * math.sqrt(math.log(2.0 * math.sqrt(n))) * D / math.sqrt(n)
    if d == 2:
        return 10.0 * D * math.log(2.0 * math.sqrt(n)) ** 1.5 / math.sqrt(n)
    scale = n ** (1.0 / d) * (d / 2.0 - 1.0) ** (2.0 / d)
    return 10.0 * D * math.sqrt(math.log(2.0 * scale)) / scale
