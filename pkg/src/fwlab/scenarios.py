"""Named experiment scenarios.

Each entry pins a feasible set, an objective with its reference value, a
deterministic starting point, the step rules it is meant to be run with, and
a default horizon.  Names are stable identifiers referenced by acceptance
tests and the CLI; changing a scenario is a breaking change, add a new name
instead.

The registry spans the three behaviors the library is built to measure:

  * `stadium-fig1` and `openloop-family`: sharp-but-not-uniformly-convex
    geometry where the rescaled gap h_t = (t+ell) F_t must decay to zero;
  * `simplex-negative-control`: a polytope instance with no dual sharpness,
    kept as the contrast case (and as a reminder that its late-stage
    behavior is dominated by the interior optimum, not by the classical
    early-iteration 1/t plateau, see notes on the entry);
  * `lp4-lbg` and `heb-r2-ball`: uniformly convex sets where lower-bounded
    gradients resp. a Holder error bound convert sharpness into fast rates.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .geometry import FeasibleSet, L2Ball, LpBall, Simplex, Stadium
from .objectives import (DistancePower, GroundTruth, HebCertificate, Linear,
                         Objective, Quadratic, StadiumPsi)
from .stepping import LineSearch, OpenLoop, ShortStep, StepRule


def make_rule(label: str, L: float) -> StepRule:
    """Step rule from a registry label: 'ss', 'ls', or 'olN' (N = ell)."""
    if label == "ss":
        return ShortStep(L=L)
    if label == "ls":
        return LineSearch()
    if label.startswith("ol") and label[2:].isdigit():
        return OpenLoop(ell=int(label[2:]))
    raise ValueError(f"unknown rule label {label!r}")


@dataclasses.dataclass(frozen=True)
class Scenario:
    name: str
    summary: str
    rule_labels: tuple[str, ...]
    t_max: int
    _builder: object

    def build(self) -> dict:
        """Fresh (set, objective, x0, rules) instances for one run."""
        set_, objective, x0 = self._builder()
        rules = {label: make_rule(label, objective.L) for label in self.rule_labels}
        return {"set": set_, "objective": objective, "x0": x0,
                "rules": rules, "t_max": self.t_max}


def _stadium_instance() -> tuple[FeasibleSet, Objective, np.ndarray]:
    set_ = Stadium(half_length=1.0)
    truth = GroundTruth(
        f_star=0.0,
        minimizers=[(2.0, 0.0)],
        heb=HebCertificate(B=16.0, r=3.0, rho=0.3),
    )
    return set_, StadiumPsi(c=2.0, ground_truth=truth), np.array([0.0, 1.0])


def _simplex_negative_control() -> tuple[FeasibleSet, Objective, np.ndarray]:
    d = 50
    set_ = Simplex(d)
    truth = GroundTruth(
        f_star=1.0 / (2 * d),
        minimizers=[np.full(d, 1.0 / d)],
        # F = ||x - x*||^2 / 2 exactly on the simplex, hence this bound.
        heb=HebCertificate(B=2.0, r=2.0, rho=1.0),
    )
    objective = Quadratic(np.eye(d), np.zeros(d), ground_truth=truth)
    # Generic interior start with strictly increasing coordinates.  A vertex
    # start is degenerate here: the short step fills one coordinate per
    # iteration and lands exactly on the barycenter at t = d - 1.
    x0 = np.arange(1, d + 1, dtype=float)
    x0 /= x0.sum()
    return set_, objective, x0


def _lp4_lbg() -> tuple[FeasibleSet, Objective, np.ndarray]:
    set_ = LpBall(np.zeros(2), 1.0, p=4.0)
    c = np.array([0.6, 0.8])
    s_star = set_.lmo(c)
    truth = GroundTruth(f_star=float(c @ s_star), minimizers=[s_star])
    return set_, Linear(c, ground_truth=truth), set_.lmo(-c)


def _heb_r2_ball() -> tuple[FeasibleSet, Objective, np.ndarray]:
    set_ = L2Ball(np.zeros(2), 1.0)
    objective = DistancePower(anchor=np.array([0.6, 0.8]), r=2.0)
    return set_, objective, np.array([-0.8, 0.6])


REGISTRY: dict[str, Scenario] = {
    s.name: s for s in (
        Scenario(
            name="stadium-fig1",
            summary="stadium set, curved-cap objective, all three rules; "
                    "h_t must fall, tail slope beyond -1",
            rule_labels=("ss", "ls", "ol2"),
            t_max=100_000,
            _builder=_stadium_instance,
        ),
        Scenario(
            name="simplex-negative-control",
            summary="squared norm over the 50-simplex; flat faces, no dual "
                    "sharpness certificate",
            rule_labels=("ss",),
            t_max=100_000,
            _builder=_simplex_negative_control,
        ),
        Scenario(
            name="lp4-lbg",
            summary="linear objective over the l4 ball: lower-bounded "
                    "gradient with q=4 sharpness, target slope -2",
            rule_labels=("ss",),
            t_max=1_000_000,
            _builder=_lp4_lbg,
        ),
        Scenario(
            name="heb-r2-ball",
            summary="squared distance to a boundary point of the disk: "
                    "vanishing gradient, error-bound order 2, target slope -2",
            rule_labels=("ss", "ls", "ol2"),
            t_max=1_000_000,
            _builder=_heb_r2_ball,
        ),
        Scenario(
            name="openloop-family",
            summary="stadium instance under open-loop ell/(t+ell) for "
                    "ell = 2, 3, 4",
            rule_labels=("ol2", "ol3", "ol4"),
            t_max=100_000,
            _builder=_stadium_instance,
        ),
    )
}


def get_scenario(name: str) -> Scenario:
    try:
        return REGISTRY[name]
    except KeyError:
        known = ", ".join(sorted(REGISTRY))
        raise KeyError(f"unknown scenario {name!r}; known: {known}") from None


def scenario_names() -> tuple[str, ...]:
    return tuple(sorted(REGISTRY))
