"""Smooth convex objectives with exact gradients and per-instance ground truth.

Each objective knows a valid smoothness constant ``L`` (curvature bound on the
intended feasible set) and may carry a ``GroundTruth``: the optimal value, the
minimizer set as explicit witness points, and optionally a local error-bound
certificate dist(x, M)^r <= B (f(x) - f*) valid within ``rho`` of M.  Ground
truth is a property of the (objective, set) pairing, so scenario constructors
fill it in; the kinds themselves only default it when it is intrinsic (the
distance-power objective is minimized at its anchor wherever the anchor is
feasible).

``line_derivative`` returns the directional derivative gamma -> <grad f(x +
gamma*d), d> as a cheap scalar closure; exact line search bisects on it, so
the closures avoid per-call array allocation where a closed form exists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import as_vector, _frozen


@dataclass(frozen=True)
class HebCertificate:
    """Local error bound dist(x, M)^r <= B (f(x) - f*) for dist(x, M) < rho."""

    B: float
    r: float
    rho: float

    def __post_init__(self):
        if not (np.isfinite(self.B) and self.B > 0):
            raise ValueError(f"B must be positive, got {self.B}")
        if not self.r >= 2:
            raise ValueError(f"order r must be >= 2, got {self.r}")
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")


@dataclass(frozen=True)
class GroundTruth:
    """Known optimum: f*, optional minimizer witness points (k, d), optional
    error bound.  f* alone is enough for primal gaps; distance queries need
    witnesses."""

    f_star: float
    minimizers: np.ndarray | None = None
    heb: HebCertificate | None = None

    def __post_init__(self):
        if self.minimizers is not None:
            M = np.atleast_2d(np.asarray(self.minimizers, dtype=float))
            if M.ndim != 2 or not np.all(np.isfinite(M)):
                raise ValueError("minimizers must be a finite (k, d) array")
            object.__setattr__(self, "minimizers", _frozen(M))
        if not np.isfinite(self.f_star):
            raise ValueError("f_star must be finite")

    def distance(self, x: np.ndarray) -> float:
        if self.minimizers is None:
            raise ValueError("ground truth has no minimizer witnesses")
        return float(np.min(np.linalg.norm(self.minimizers - x, axis=1)))


class Objective:
    """Base interface: value, gradient, and optional ground truth."""

    L: float
    kind: str = "abstract"
    ground_truth: GroundTruth | None = None

    def value(self, x) -> float:
        raise NotImplementedError

    def grad(self, x) -> np.ndarray:
        raise NotImplementedError

    def line_derivative(self, x: np.ndarray, d: np.ndarray) -> Callable[[float], float]:
        grad = self.grad
        return lambda gamma: float(grad(x + gamma * d) @ d)

    def primal_gap(self, x) -> float:
        """f(x) - f*; tiny negative round-off (>= -1e-12) clips to zero."""
        if self.ground_truth is None:
            raise ValueError(
                f"{self.kind} objective has no ground truth; compute a reference "
                "optimum first (solver.reference_solve) or work with dual gaps only"
            )
        gap = self.value(x) - self.ground_truth.f_star
        if gap < -1e-12:
            raise ValueError(f"primal gap {gap} is negative beyond round-off; bad f_star?")
        return max(gap, 0.0)

    def dist_to_minimizers(self, x) -> float:
        if self.ground_truth is None or self.ground_truth.minimizers is None:
            raise ValueError(f"{self.kind} objective has no minimizer witness")
        return self.ground_truth.distance(np.asarray(x, dtype=float))

    def descriptor(self) -> dict:
        raise NotImplementedError

    def __repr__(self) -> str:
        fields = ", ".join(f"{k}={v!r}" for k, v in self.descriptor().items() if k != "kind")
        return f"{type(self).__name__}({fields})"


class Quadratic(Objective):
    """f(x) = 0.5 x'Qx + c'x with Q symmetric positive semidefinite."""

    kind = "quadratic"

    def __init__(self, Q, c, ground_truth: GroundTruth | None = None):
        Q = np.asarray(Q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ValueError("Q must be square")
        if not np.allclose(Q, Q.T, atol=1e-12):
            raise ValueError("Q must be symmetric")
        eigs = np.linalg.eigvalsh(Q)
        if eigs[0] < -1e-10:
            raise ValueError(f"Q must be positive semidefinite (min eig {eigs[0]})")
        self.Q = _frozen(Q)
        self.c = _frozen(as_vector(c, Q.shape[0], "c"))
        self.L = max(float(eigs[-1]), 0.0)
        self.dim = Q.shape[0]
        self.ground_truth = ground_truth

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return 0.5 * float(x @ self.Q @ x) + float(self.c @ x)

    def grad(self, x) -> np.ndarray:
        return self.Q @ np.asarray(x, dtype=float) + self.c

    def line_derivative(self, x, d):
        qd = self.Q @ d
        b0 = float((self.Q @ x + self.c) @ d)
        a = float(qd @ d)
        return lambda gamma: b0 + gamma * a

    def descriptor(self) -> dict:
        return {"kind": self.kind, "Q": self.Q.tolist(), "c": self.c.tolist()}


class Linear(Objective):
    """f(x) = c'x.  Any L > 0 is a valid smoothness constant; it only enters
    the short-step denominator, so it is a tunable of the experiment."""

    kind = "linear"

    def __init__(self, c, L: float = 1.0, ground_truth: GroundTruth | None = None):
        self.c = _frozen(as_vector(c, name="c"))
        if not (np.isfinite(L) and L > 0):
            raise ValueError(f"L must be positive, got {L}")
        self.L = float(L)
        self.dim = self.c.shape[0]
        self.ground_truth = ground_truth

    def value(self, x) -> float:
        return float(self.c @ np.asarray(x, dtype=float))

    def grad(self, x) -> np.ndarray:
        return self.c

    def line_derivative(self, x, d):
        cd = float(self.c @ d)
        return lambda gamma: cd

    def descriptor(self) -> dict:
        return {"kind": self.kind, "c": self.c.tolist(), "L": self.L}


class DistancePower(Objective):
    """f(x) = ||x - anchor||^r for r >= 2.

    When the anchor is feasible it is the unique minimizer with f* = 0, and
    dist(x, M)^r = f(x) - f* holds exactly: the error-bound certificate
    (B = 1, r, any rho) is intrinsic.  For r > 2 a radius bound on
    max ||x - anchor|| over the feasible set is needed to state L; r = 2
    gives L = 2 unconditionally.
    """

    kind = "distance_power"

    def __init__(self, anchor, r: float = 2.0, radius_bound: float | None = None,
                 L: float | None = None, anchor_feasible: bool = True):
        self.anchor = _frozen(as_vector(anchor, name="anchor"))
        if not (np.isfinite(r) and r >= 2):
            raise ValueError(f"r must be >= 2, got {r}")
        self.r = float(r)
        self.dim = self.anchor.shape[0]
        if L is not None:
            self.L = float(L)
        elif r == 2:
            self.L = 2.0
        elif radius_bound is not None:
            self.L = r * (r - 1.0) * float(radius_bound) ** (r - 2.0)
        else:
            raise ValueError("r > 2 needs radius_bound (or explicit L) to state smoothness")
        if not (np.isfinite(self.L) and self.L > 0):
            raise ValueError(f"L must be positive and finite, got {self.L}")
        self.ground_truth = None
        if anchor_feasible:
            self.ground_truth = GroundTruth(
                f_star=0.0,
                minimizers=self.anchor[None, :],
                heb=HebCertificate(B=1.0, r=self.r, rho=math.inf),
            )

    def value(self, x) -> float:
        u = np.asarray(x, dtype=float) - self.anchor
        return float(u @ u) ** (self.r / 2.0)

    def grad(self, x) -> np.ndarray:
        u = np.asarray(x, dtype=float) - self.anchor
        if self.r == 2.0:
            return 2.0 * u
        n2 = float(u @ u)
        if n2 == 0.0:
            return np.zeros_like(u)
        return self.r * n2 ** (self.r / 2.0 - 1.0) * u

    def line_derivative(self, x, d):
        u = x - self.anchor
        uu, ud, dd = float(u @ u), float(u @ d), float(d @ d)
        r = self.r
        if r == 2.0:
            return lambda gamma: 2.0 * (ud + gamma * dd)

        def dphi(gamma: float) -> float:
            n2 = uu + gamma * (2.0 * ud + gamma * dd)
            if n2 <= 0.0:
                return 0.0
            return r * n2 ** (r / 2.0 - 1.0) * (ud + gamma * dd)

        return dphi

    def descriptor(self) -> dict:
        return {"kind": self.kind, "anchor": self.anchor.tolist(), "r": self.r, "L": self.L}


def psi(u: float) -> float:
    """psi(u) = u - arctan(u), evaluated without cancellation near 0."""
    if abs(u) < 1e-3:
        u2 = u * u
        # u - arctan u = u^3/3 - u^5/5 + u^7/7 - ...; truncation < 1e-27 here.
        return u * u2 * (1.0 / 3.0 - u2 * (0.2 - u2 / 7.0))
    return u - math.atan(u)


def psi_prime(u: float) -> float:
    return u * u / (1.0 + u * u)


class StadiumPsi(Objective):
    """f(x1, x2) = 0.5 x2^2 + psi(c - x1) with psi(u) = u - arctan(u), c >= 2.

    On sets contained in {x1 <= c} the Hessian is diag(psi''(c - x1), 1) with
    psi'' <= 1, so f is convex and 1-smooth there.  Paired with a stadium of
    half-length a = c - 1 the minimizer is the right cap apex (c, 0), where
    the gradient vanishes for c = 2 exactly.
    """

    kind = "stadium_psi"

    def __init__(self, c: float = 2.0, ground_truth: GroundTruth | None = None):
        if not (np.isfinite(c) and c >= 2):
            raise ValueError(f"c must be >= 2, got {c}")
        self.c = float(c)
        self.L = 1.0
        self.dim = 2
        self.ground_truth = ground_truth

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return 0.5 * float(x[1]) ** 2 + psi(self.c - float(x[0]))

    def grad(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.array([-psi_prime(self.c - float(x[0])), float(x[1])])

    def line_derivative(self, x, d):
        x0, x1 = float(x[0]), float(x[1])
        d0, d1 = float(d[0]), float(d[1])
        c = self.c

        def dphi(gamma: float) -> float:
            return -d0 * psi_prime(c - x0 - gamma * d0) + d1 * (x1 + gamma * d1)

        return dphi

    def descriptor(self) -> dict:
        return {"kind": self.kind, "c": self.c}


def validate_heb(objective: Objective, members: np.ndarray, tol: float = 1e-9):
    """Check dist(x, M)^r <= B (f(x) - f*) + tol on supplied feasible points.

    Points farther than rho from the witness set are skipped (the bound is
    local).  Returns (ok, worst_margin, worst_point).
    """
    gt = objective.ground_truth
    if gt is None or gt.heb is None:
        raise ValueError("objective carries no error-bound certificate")
    cert = gt.heb
    worst = -math.inf
    worst_x = None
    for x in np.atleast_2d(np.asarray(members, dtype=float)):
        dist = gt.distance(x)
        if dist >= cert.rho:
            continue
        margin = dist**cert.r - cert.B * (objective.value(x) - gt.f_star)
        if margin > worst:
            worst, worst_x = margin, x
    return worst <= tol, worst, worst_x
