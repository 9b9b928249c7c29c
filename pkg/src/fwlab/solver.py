"""Conditional gradient loop with per-step verification of the proved bounds.

The loop is deliberately plain: gradient, oracle atom, gap, step, update, in
that order, with the update written as ``x + gamma * (s - x)``.  What makes it
worth a module is the bookkeeping: every step checks

  * 0 <= F_t <= g_t            (weak duality of the gap),
  * F_{t+1} <= F_t - gamma g_t + (L/2) gamma^2 d_t^2   (smoothness model),
  * F_{t+1} <= F_t - (1/2) min(g_t, g_t^2/(L d_t^2))   (short step/line search),
  * F_t <= 2 L D^2 / (t + 2) for t >= 1                (sublinear envelope),
  * d_t <= D, gamma in [0, 1], feasibility every 1000 steps,

each to an absolute tolerance of 1e-9, raising `InvariantViolation` on the
first failure.  NaN or infinity anywhere raises `NumericFailure` naming the
offending iteration.  All checks need f*, so they run exactly when the
objective carries ground truth; without it the solver still runs in
gap-only mode (F, delta and h are recorded as NaN).

Traces keep every iterate for t <= 1000 and then subsample geometrically
(next recorded t is the previous scaled by 1.02), which keeps million-step
traces at a few thousand records while staying dense per decade in log t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceFailure, InvariantViolation, NumericFailure
from .geometry import FeasibleSet, as_vector
from .objectives import Objective
from .stepping import (LineSearch, OpenLoop, ShortStep, StepRule,
                       descent_model_bound, half_min_progress, rule_ell,
                       step_size)

CHECK_TOL = 1e-9
FEAS_TOL = 1e-9
FEAS_EVERY = 1000
DENSE_UNTIL = 1000
GEOMETRIC_FACTOR = 1.02


@dataclass
class IterateRecord:
    t: int
    x: np.ndarray
    s: np.ndarray
    gamma: float
    F: float
    g: float
    d: float
    delta: float
    h: float


@dataclass
class Trace:
    records: list[IterateRecord]
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    @property
    def t(self) -> np.ndarray:
        return np.array([r.t for r in self.records], dtype=int)

    def final(self) -> IterateRecord:
        return self.records[-1]

    def __len__(self) -> int:
        return len(self.records)


def _next_recorded(t: int) -> int:
    if t < DENSE_UNTIL:
        return t + 1
    return max(t + 1, int(round(t * GEOMETRIC_FACTOR)))


def run(set_: FeasibleSet, objective: Objective, rule: StepRule, x0,
        t_max: int, gap_tol: float | None = None,
        full_resolution: bool = False) -> Trace:
    """Run t_max conditional gradient steps from x0 and return the trace.

    Stops early when gap_tol is given and g_t falls to or below it.  The
    returned trace always contains the final iterate's record.
    """
    if not (isinstance(t_max, (int, np.integer)) and t_max >= 1):
        raise ValueError(f"t_max must be a positive integer, got {t_max}")
    x = as_vector(x0, set_.dim, "x0").copy()
    if not set_.membership(x, FEAS_TOL):
        raise ValueError(f"x0 is not feasible within {FEAS_TOL}")

    gt = objective.ground_truth
    f_star = gt.f_star if gt is not None else None
    has_witness = (gt is not None and gt.minimizers is not None
                   and gt.minimizers.size > 0)
    L = objective.L
    D = set_.diameter()
    envelope_scale = 2.0 * L * D * D
    ell = rule_ell(rule)
    needs_dphi = isinstance(rule, LineSearch)
    monotone_rule = isinstance(rule, (ShortStep, LineSearch))

    value = objective.value
    grad = objective.grad
    lmo = set_.lmo

    records: list[IterateRecord] = []
    next_rec = 0
    # State of the previous step, for the one-step descent checks.
    F_prev = g_prev = d_prev = gamma_prev = None

    max_envelope_violation = 0.0
    max_descent_violation = 0.0

    t = 0
    while True:
        fx = value(x)
        gx = grad(x)
        if not (math.isfinite(fx) and np.all(np.isfinite(gx)) and np.all(np.isfinite(x))):
            raise NumericFailure(f"non-finite value, gradient or iterate at t={t}")
        s = lmo(gx)
        diff = x - s
        g = float(gx @ diff)
        d = math.sqrt(float(diff @ diff))
        if not (math.isfinite(g) and math.isfinite(d)):
            raise NumericFailure(f"non-finite gap or atom distance at t={t}")
        if g < -1e-12:
            raise InvariantViolation(f"dual gap {g} negative at t={t}")
        g = max(g, 0.0)
        if d > D + CHECK_TOL:
            raise InvariantViolation(f"atom distance {d} exceeds diameter {D} at t={t}")

        if f_star is not None:
            F = fx - f_star
            if F < -1e-12:
                raise InvariantViolation(f"primal gap {F} negative at t={t}; bad f_star?")
            F = max(F, 0.0)
            if F > g + CHECK_TOL:
                raise InvariantViolation(f"primal gap {F} exceeds dual gap {g} at t={t}")
            if t >= 1:
                viol = F - envelope_scale / (t + 2)
                max_envelope_violation = max(max_envelope_violation, viol)
                if viol > CHECK_TOL:
                    raise InvariantViolation(
                        f"F={F} breaks the 2LD^2/(t+2) envelope at t={t}")
            if F_prev is not None:
                model = descent_model_bound(F_prev, g_prev, d_prev, gamma_prev, L)
                viol = F - model
                max_descent_violation = max(max_descent_violation, viol)
                if viol > CHECK_TOL:
                    raise InvariantViolation(
                        f"descent model violated at t={t}: F={F} > {model}")
                if monotone_rule:
                    guaranteed = F_prev - half_min_progress(g_prev, d_prev, L)
                    if F - guaranteed > CHECK_TOL:
                        raise InvariantViolation(
                            f"half-min progress violated at t={t}: F={F} > {guaranteed}")
            h = (t + ell) * F
        else:
            F = h = math.nan

        delta = objective.dist_to_minimizers(x) if has_witness else math.nan

        stopping = (gap_tol is not None and g <= gap_tol) or t >= t_max
        if full_resolution or t >= next_rec or stopping:
            records.append(IterateRecord(t=t, x=x.copy(), s=s, gamma=math.nan,
                                         F=F, g=g, d=d, delta=delta, h=h))
            if t >= next_rec:
                next_rec = _next_recorded(t)

        gamma = step_size(rule, t, g, d,
                          objective.line_derivative(x, s - x) if needs_dphi else None)
        if not 0.0 <= gamma <= 1.0:
            raise InvariantViolation(f"step size {gamma} outside [0, 1] at t={t}")
        if records and records[-1].t == t:
            records[-1].gamma = gamma

        if stopping:
            break
        x = x + gamma * (s - x)
        if t > 0 and t % FEAS_EVERY == 0 and not set_.membership(x, FEAS_TOL):
            raise InvariantViolation(f"iterate left the feasible set at t={t}")
        if f_star is not None:
            F_prev, g_prev, d_prev, gamma_prev = F, g, d, gamma
        t += 1

    meta = {
        "set": set_.descriptor(),
        "objective": objective.descriptor(),
        "rule": {"label": rule.label, **_rule_params(rule)},
        "t_max": int(t_max),
        "stopped_at": int(t),
        "gap_tol": gap_tol,
        "ell": ell,
        "L": L,
        "diameter": D,
        "f_star": f_star,
        "full_resolution": bool(full_resolution),
        "tolerances": {"check": CHECK_TOL, "feasibility": FEAS_TOL},
        "max_envelope_violation": max_envelope_violation,
        "max_descent_violation": max_descent_violation,
    }
    return Trace(records=records, meta=meta)


def _rule_params(rule: StepRule) -> dict:
    if isinstance(rule, ShortStep):
        return {"L": rule.L}
    if isinstance(rule, LineSearch):
        return {"tol_gamma": rule.tol_gamma}
    return {"ell": rule.ell}


def reference_solve(set_: FeasibleSet, objective: Objective, x0=None,
                    gap_tol: float = 1e-10, budget: int = 10_000_000) -> dict:
    """Estimate f* by running the solver until the dual gap certifies it.

    Returns {"f_star_est", "gap_certificate", "t", "x"} with the guarantee
    f_star_est - gap_certificate <= f* <= f_star_est.  Uses the short step
    (the objective always knows an L) in a lean loop without trace recording;
    raises `ConvergenceFailure` when the budget runs out first.
    """
    x = (set_.lmo(np.zeros(set_.dim)) if x0 is None
         else as_vector(x0, set_.dim, "x0").copy())
    if not set_.membership(x, FEAS_TOL):
        raise ValueError(f"x0 is not feasible within {FEAS_TOL}")
    L = objective.L
    grad = objective.grad
    lmo = set_.lmo
    for t in range(budget + 1):
        gx = grad(x)
        s = lmo(gx)
        diff = x - s
        g = float(gx @ diff)
        d2 = float(diff @ diff)
        if not (math.isfinite(g) and math.isfinite(d2)):
            raise NumericFailure(f"non-finite quantity in reference solve at t={t}")
        if g <= gap_tol:
            return {"f_star_est": objective.value(x), "gap_certificate": max(g, 0.0),
                    "t": t, "x": x}
        gamma = 1.0 if d2 == 0.0 else min(g / (L * d2), 1.0)
        x = x + gamma * (s - x)
    raise ConvergenceFailure(
        f"reference solve did not reach gap {gap_tol} within {budget} steps")
