"""Step-size rules for the conditional gradient update x + gamma (s - x).

Three rules, all restricted to gamma in [0, 1]:

  * short step      gamma = min(g / (L d^2), 1), the minimizer of the
                    smoothness upper model along the chord;
  * exact line search, by bisection on the monotone directional derivative
    phi'(gamma) = <grad f(x + gamma (s - x)), s - x> down to a bracket of
    width tol_gamma;
  * open loop       gamma = ell / (t + ell) for an integer ell >= 2.

The dual gap g is nonnegative for a correct oracle; values below -1e-12 are
treated as an invariant violation rather than clamped away.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import InvariantViolation

GAP_SLACK = 1e-12


@dataclass(frozen=True)
class ShortStep:
    L: float
    label = "ss"

    def __post_init__(self):
        if not (np.isfinite(self.L) and self.L > 0):
            raise ValueError(f"short step needs L > 0, got {self.L}")


@dataclass(frozen=True)
class LineSearch:
    tol_gamma: float = 1e-12
    label = "ls"

    def __post_init__(self):
        if not 0.0 < self.tol_gamma <= 1e-6:
            raise ValueError(f"tol_gamma must lie in (0, 1e-6], got {self.tol_gamma}")


@dataclass(frozen=True)
class OpenLoop:
    ell: int = 2

    def __post_init__(self):
        if not (isinstance(self.ell, (int, np.integer)) and self.ell >= 2):
            raise ValueError(f"open loop needs an integer ell >= 2, got {self.ell}")

    @property
    def label(self) -> str:
        return f"ol{self.ell}"


StepRule = Union[ShortStep, LineSearch, OpenLoop]


def rule_ell(rule: StepRule) -> int:
    """The ell used in the rescaled gap h_t = (t + ell) F_t; 2 unless open loop."""
    return rule.ell if isinstance(rule, OpenLoop) else 2


def _checked_gap(g: float) -> float:
    if g < -GAP_SLACK:
        raise InvariantViolation(f"dual gap {g} is negative beyond round-off")
    return max(g, 0.0)


def short_step_gamma(g: float, d: float, L: float) -> float:
    g = _checked_gap(g)
    if d == 0.0:
        return 1.0  # x == s; the step is a no-op either way
    return min(g / (L * d * d), 1.0)


def line_search_gamma(dphi: Callable[[float], float], tol_gamma: float) -> float:
    """Bisection on the nondecreasing phi' over [0, 1].

    Returns 0 or 1 when the derivative does not change sign inside, otherwise
    the midpoint of the final bracket.
    """
    if dphi(0.0) >= 0.0:
        return 0.0
    if dphi(1.0) <= 0.0:
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol_gamma:
        mid = 0.5 * (lo + hi)
        if dphi(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def step_size(rule: StepRule, t: int, g: float, d: float,
              dphi: Callable[[float], float] | None = None) -> float:
    """Dispatch on the rule; line search requires the dphi closure."""
    if isinstance(rule, ShortStep):
        return short_step_gamma(g, d, rule.L)
    if isinstance(rule, LineSearch):
        _checked_gap(g)
        if dphi is None:
            raise ValueError("line search needs the directional derivative closure")
        return line_search_gamma(dphi, rule.tol_gamma)
    if isinstance(rule, OpenLoop):
        _checked_gap(g)
        return rule.ell / (t + rule.ell)
    raise TypeError(f"unknown step rule {rule!r}")


def descent_model_bound(F: float, g: float, d: float, gamma: float, L: float) -> float:
    """Smoothness upper model for the next primal gap: F - gamma g + L/2 gamma^2 d^2."""
    return F - gamma * g + 0.5 * L * gamma * gamma * d * d


def half_min_progress(g: float, d: float, L: float) -> float:
    """Guaranteed per-step progress of short step / line search:
    (1/2) min(g, g^2 / (L d^2))."""
    if g <= 0.0:
        return 0.0
    if d == 0.0:
        return 0.5 * g
    return 0.5 * min(g, g * g / (L * d * d))
