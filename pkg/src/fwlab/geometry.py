"""Feasible-set catalog with deterministic linear minimization oracles.

Every set here is compact and convex in R^d.  The solver only ever touches a
set through three operations: the linear minimization oracle

    lmo(g)  in  argmin_{s in C} <g, s>,

approximate membership (used for runtime feasibility assertions), and the
Euclidean diameter (used in descent envelopes).  Sets are immutable and the
oracles are pure functions, so repeated calls with the same input return the
same atom bit for bit.

Determinism is not cosmetic: sharpness of the dual gap is a property of the
pair (set, atom-selection rule), not of the set alone, so the selection on
flat faces must be pinned down.  The default rule minimizes <g, .> and breaks
ties toward the lexicographically smallest coordinate vector; g = 0 returns a
fixed canonical atom per kind.  Kinds with flat faces accept
``tie_break="lex-max"`` as an alternative, but only the default is load
bearing.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

_TIE_BREAKS = ("lex-min", "lex-max")


@dataclasses.dataclass(frozen=True)
class UcParams:
    """Power-type uniform convexity constants (alpha, q) of a set.

    C is (alpha, q)-uniformly convex when for all x, y in C, lam in [0,1] and
    unit z:  lam*x + (1-lam)*y + lam*(1-lam)*alpha*||x-y||^q * z  stays in C.
    """

    alpha: float
    q: float

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not (np.isfinite(self.q) and self.q >= 2):
            raise ValueError(f"q must be >= 2, got {self.q}")


def as_vector(x, dim: int | None = None, name: str = "x") -> np.ndarray:
    """Coerce to a finite 1-D float64 array, optionally of fixed length."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"{name} must be a 1-D vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"{name} must have dimension {dim}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} must be finite")
    return v


def _frozen(v: np.ndarray) -> np.ndarray:
    out = np.array(v, dtype=float)
    out.setflags(write=False)
    return out


def _check_tie_break(tie_break: str) -> str:
    if tie_break not in _TIE_BREAKS:
        raise ValueError(f"tie_break must be one of {_TIE_BREAKS}, got {tie_break!r}")
    return tie_break


def _lex_min_row(rows: np.ndarray) -> np.ndarray:
    return min(map(tuple, rows))


def _unit(g: np.ndarray):
    """g / ||g||, or None when g = 0.

    Rescales by max|g_i| before the dot product so the norm cannot overflow
    for extreme but finite gradients (||g|| > ~1e154 would otherwise square
    to inf and silently return a garbage atom)."""
    m = float(np.max(np.abs(g)))
    if m == 0.0:
        return None
    u = g / m
    return u / math.sqrt(float(u @ u))


def project_simplex(y: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort algorithm)."""
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - 1.0
    ks = np.arange(1, y.shape[0] + 1)
    k = ks[u - css / ks > 0][-1]
    return np.maximum(y - css[k - 1] / k, 0.0)


class FeasibleSet:
    """Common interface; every concrete kind fills in lmo/distance/diameter."""

    dim: int
    kind: str = "abstract"

    def lmo(self, g) -> np.ndarray:
        raise NotImplementedError

    def distance(self, x) -> float:
        """Euclidean distance to the set (exact, or a tight upper bound where
        noted on the kind).  Upper bounds make membership conservative, which
        is the safe direction for feasibility checks."""
        raise NotImplementedError

    def membership(self, x, tol: float = 1e-9) -> bool:
        return self.distance(x) <= tol

    def diameter(self) -> float:
        raise NotImplementedError

    def descriptor(self) -> dict:
        raise NotImplementedError

    def __repr__(self) -> str:
        fields = ", ".join(f"{k}={v!r}" for k, v in self.descriptor().items() if k != "kind")
        return f"{type(self).__name__}({fields})"


class L2Ball(FeasibleSet):
    """Euclidean ball {x : ||x - center|| <= radius}."""

    kind = "l2ball"

    def __init__(self, center, radius: float):
        self.center = _frozen(as_vector(center, name="center"))
        if not (np.isfinite(radius) and radius > 0):
            raise ValueError(f"radius must be positive, got {radius}")
        self.radius = float(radius)
        self.dim = self.center.shape[0]

    def lmo(self, g) -> np.ndarray:
        g = as_vector(g, self.dim, "g")
        u = _unit(g)
        if u is None:
            # Canonical atom: step the full radius along -e1.
            s = self.center.copy()
            s[0] -= self.radius
            return s
        return self.center - self.radius * u

    def distance(self, x) -> float:
        x = as_vector(x, self.dim)
        return max(0.0, float(np.linalg.norm(x - self.center)) - self.radius)

    def diameter(self) -> float:
        return 2.0 * self.radius

    def descriptor(self) -> dict:
        return {"kind": self.kind, "center": self.center.tolist(), "radius": self.radius}


class LpBall(FeasibleSet):
    """p-norm ball {x : ||x - center||_p <= radius} for finite p >= 2.

    The ball is strictly convex, so the oracle atom is unique whenever g != 0;
    there is no tie-breaking to pin down.  Membership uses the distance to the
    radially scaled point, an upper bound on the true Euclidean distance that
    is exact to first order near the boundary.
    """

    kind = "lpball"

    def __init__(self, center, radius: float, p: float):
        self.center = _frozen(as_vector(center, name="center"))
        if not (np.isfinite(radius) and radius > 0):
            raise ValueError(f"radius must be positive, got {radius}")
        if not (np.isfinite(p) and p >= 2):
            raise ValueError(f"p must be finite and >= 2, got {p}")
        self.radius = float(radius)
        self.p = float(p)
        self.dim = self.center.shape[0]

    def lmo(self, g) -> np.ndarray:
        g = as_vector(g, self.dim, "g")
        gmax = float(np.max(np.abs(g)))
        if gmax == 0.0:
            s = self.center.copy()
            s[0] -= self.radius
            return s
        # Hoelder equality case; normalize first so the powers cannot overflow.
        gs = g / gmax
        w = np.sign(gs) * np.abs(gs) ** (1.0 / (self.p - 1.0))
        w /= float(np.sum(np.abs(w) ** self.p)) ** (1.0 / self.p)
        return self.center - self.radius * w

    def distance(self, x) -> float:
        x = as_vector(x, self.dim)
        u = x - self.center
        np_norm = float(np.sum(np.abs(u) ** self.p)) ** (1.0 / self.p)
        if np_norm <= self.radius:
            return 0.0
        return float(np.linalg.norm(u)) * (np_norm - self.radius) / np_norm

    def diameter(self) -> float:
        # max ||u||_2 over the unit p-ball is d^(1/2 - 1/p), at the diagonal corner.
        return 2.0 * self.radius * self.dim ** (0.5 - 1.0 / self.p)

    def descriptor(self) -> dict:
        return {
            "kind": self.kind,
            "center": self.center.tolist(),
            "radius": self.radius,
            "p": self.p,
        }


class Simplex(FeasibleSet):
    """Probability simplex {x >= 0, sum x = 1} in R^dim."""

    kind = "simplex"

    def __init__(self, dim: int, tie_break: str = "lex-min"):
        if not (isinstance(dim, (int, np.integer)) and dim >= 1):
            raise ValueError(f"dim must be a positive integer, got {dim}")
        self.dim = int(dim)
        self.tie_break = _check_tie_break(tie_break)

    def lmo(self, g) -> np.ndarray:
        g = as_vector(g, self.dim, "g")
        if not np.any(g):
            idx = 0  # canonical atom: first vertex
        elif self.tie_break == "lex-min":
            # Among tied minimizing vertices e_i, the lexicographically
            # smallest coordinate vector is the one with the largest index.
            idx = self.dim - 1 - int(np.argmin(g[::-1]))
        else:
            idx = int(np.argmin(g))
        s = np.zeros(self.dim)
        s[idx] = 1.0
        return s

    def distance(self, x) -> float:
        x = as_vector(x, self.dim)
        return float(np.linalg.norm(x - project_simplex(x)))

    def diameter(self) -> float:
        return math.sqrt(2.0) if self.dim >= 2 else 0.0

    def descriptor(self) -> dict:
        return {"kind": self.kind, "dim": self.dim}


class Box(FeasibleSet):
    """Axis-aligned box {lo <= x <= hi} (componentwise)."""

    kind = "box"

    def __init__(self, lo, hi, tie_break: str = "lex-min"):
        self.lo = _frozen(as_vector(lo, name="lo"))
        self.hi = _frozen(as_vector(hi, self.lo.shape[0], name="hi"))
        if np.any(self.lo > self.hi):
            raise ValueError("lo must be <= hi componentwise")
        self.dim = self.lo.shape[0]
        self.tie_break = _check_tie_break(tie_break)

    def lmo(self, g) -> np.ndarray:
        g = as_vector(g, self.dim, "g")
        tie = self.lo if self.tie_break == "lex-min" else self.hi
        # g = 0 coordinates fall through to the tie corner; the minimizing face
        # is a product set, so lex-min is just the componentwise choice.
        return np.where(g > 0, self.lo, np.where(g < 0, self.hi, tie))

    def distance(self, x) -> float:
        x = as_vector(x, self.dim)
        return float(np.linalg.norm(x - np.clip(x, self.lo, self.hi)))

    def diameter(self) -> float:
        return float(np.linalg.norm(self.hi - self.lo))

    def descriptor(self) -> dict:
        return {"kind": self.kind, "lo": self.lo.tolist(), "hi": self.hi.tolist()}


class Ellipsoid(FeasibleSet):
    """Image of the unit ball: {center + A u : ||u|| <= 1}.

    ``axes`` is either a vector of positive semi-axis lengths (A = diag(axes))
    or a symmetric positive-definite matrix A.
    """

    kind = "ellipsoid"

    def __init__(self, center, axes):
        self.center = _frozen(as_vector(center, name="center"))
        self.dim = self.center.shape[0]
        A = np.asarray(axes, dtype=float)
        if A.ndim == 1:
            A = as_vector(A, self.dim, "axes")
            if np.any(A <= 0):
                raise ValueError("semi-axes must be positive")
            A = np.diag(A)
        elif A.shape != (self.dim, self.dim):
            raise ValueError(f"axes matrix must be {self.dim}x{self.dim}")
        if not np.allclose(A, A.T, atol=1e-12):
            raise ValueError("axes matrix must be symmetric")
        eigs = np.linalg.eigvalsh(A)
        if eigs[0] <= 0:
            raise ValueError("axes matrix must be positive definite")
        self._A = _frozen(A)
        self._eig_max = float(eigs[-1])

    def lmo(self, g) -> np.ndarray:
        g = as_vector(g, self.dim, "g")
        u = _unit(g)
        if u is None:
            return self.center - self._A[:, 0]  # canonical: -A e1
        v = self._A @ u
        return self.center - self._A @ (v / float(np.linalg.norm(v)))

    def distance(self, x) -> float:
        # Upper bound via radial scaling in the u-chart; exact on rays.
        x = as_vector(x, self.dim)
        u = np.linalg.solve(self._A, x - self.center)
        n = float(np.linalg.norm(u))
        if n <= 1.0:
            return 0.0
        return float(np.linalg.norm(x - (self.center + self._A @ (u / n))))

    def diameter(self) -> float:
        return 2.0 * self._eig_max

    def descriptor(self) -> dict:
        return {"kind": self.kind, "center": self.center.tolist(), "axes": self._A.tolist()}


class VertexPolytope(FeasibleSet):
    """Convex hull of an explicit vertex list."""

    kind = "polytope"

    def __init__(self, vertices, tie_break: str = "lex-min"):
        V = np.asarray(vertices, dtype=float)
        if V.ndim != 2 or V.shape[0] < 1:
            raise ValueError("vertices must be a non-empty (n, d) array")
        if not np.all(np.isfinite(V)):
            raise ValueError("vertices must be finite")
        self.vertices = _frozen(V)
        self.dim = V.shape[1]
        self.tie_break = _check_tie_break(tie_break)

    def lmo(self, g) -> np.ndarray:
        g = as_vector(g, self.dim, "g")
        if not np.any(g):
            return self.vertices[0].copy()  # canonical: first vertex
        vals = self.vertices @ g
        tied = self.vertices[vals == vals.min()]
        if self.tie_break == "lex-min":
            return np.array(_lex_min_row(tied))
        return np.array(max(map(tuple, tied)))

    def distance(self, x) -> float:
        # Min-norm point in the translated hull (Wolfe's algorithm): finite
        # termination, so vertices and hull combinations come out at machine
        # precision instead of the slow tail of a projected-gradient loop.
        x = as_vector(x, self.dim)
        W = self.vertices - x
        norms2 = np.sum(W * W, axis=1)
        scale = max(1.0, float(norms2.max()))
        S = [int(np.argmin(norms2))]
        lam = np.array([1.0])
        y = W[S[0]].copy()
        for _ in range(200):
            i = int(np.argmin(W @ y))
            if float(W[i] @ y) >= float(y @ y) - 1e-14 * scale:
                break
            if i not in S:
                S.append(i)
                lam = np.append(lam, 0.0)
            while True:
                # Affine min-norm over the corral via the KKT system.
                n = len(S)
                K = np.zeros((n + 1, n + 1))
                K[:n, :n] = W[S] @ W[S].T
                K[:n, n] = 1.0
                K[n, :n] = 1.0
                rhs = np.zeros(n + 1)
                rhs[n] = 1.0
                mu = np.linalg.lstsq(K, rhs, rcond=None)[0][:n]
                if np.all(mu >= -1e-12):
                    lam = np.maximum(mu, 0.0)
                    lam /= lam.sum()
                    break
                # Step toward mu until the first weight hits zero, drop it.
                den = lam - mu
                with np.errstate(divide="ignore", invalid="ignore"):
                    th = np.where(den > 1e-15, lam / den, np.inf)
                theta = float(np.min(np.where(mu < 0, th, np.inf)))
                lam = (1.0 - theta) * lam + theta * mu
                keep = lam > 1e-12
                if not np.any(keep):
                    keep[int(np.argmax(mu))] = True
                S = [s for s, k in zip(S, keep) if k]
                lam = lam[keep]
                lam /= lam.sum()
            y = lam @ W[S]
        return float(np.linalg.norm(y))

    def diameter(self) -> float:
        V = self.vertices
        d2 = np.sum((V[:, None, :] - V[None, :, :]) ** 2, axis=-1)
        return math.sqrt(float(d2.max()))

    def descriptor(self) -> dict:
        return {"kind": self.kind, "vertices": self.vertices.tolist()}


class Capsule(FeasibleSet):
    """Minkowski sum of a segment [p, q] and a Euclidean ball of radius r.

    Works in any dimension; the 2-D unit-cap-radius case is `Stadium`.
    """

    kind = "capsule"

    def __init__(self, p, q, radius: float, tie_break: str = "lex-min"):
        self.p = _frozen(as_vector(p, name="p"))
        self.q = _frozen(as_vector(q, self.p.shape[0], name="q"))
        if not (np.isfinite(radius) and radius > 0):
            raise ValueError(f"radius must be positive, got {radius}")
        self.radius = float(radius)
        self.dim = self.p.shape[0]
        self.tie_break = _check_tie_break(tie_break)

    def _tie_endpoint(self) -> np.ndarray:
        ends = np.vstack([self.p, self.q])
        if self.tie_break == "lex-min":
            return np.array(_lex_min_row(ends))
        return np.array(max(map(tuple, ends)))

    def lmo(self, g) -> np.ndarray:
        g = as_vector(g, self.dim, "g")
        u = _unit(g)
        if u is None:
            s = self._tie_endpoint()
            s[0] -= self.radius
            return s
        vp, vq = float(u @ self.p), float(u @ self.q)
        if vp < vq:
            end = self.p
        elif vq < vp:
            end = self.q
        else:
            # Whole segment ties; lex order along a segment is monotone, so
            # the extreme point is the lex-extreme endpoint.
            end = self._tie_endpoint()
        return end - self.radius * u

    def _segment_distance(self, x: np.ndarray) -> float:
        axis = self.q - self.p
        den = float(axis @ axis)
        t = 0.0 if den == 0.0 else min(1.0, max(0.0, float((x - self.p) @ axis) / den))
        return float(np.linalg.norm(x - (self.p + t * axis)))

    def distance(self, x) -> float:
        x = as_vector(x, self.dim)
        return max(0.0, self._segment_distance(x) - self.radius)

    def diameter(self) -> float:
        return float(np.linalg.norm(self.q - self.p)) + 2.0 * self.radius

    def descriptor(self) -> dict:
        return {
            "kind": self.kind,
            "p": self.p.tolist(),
            "q": self.q.tolist(),
            "radius": self.radius,
        }


class Stadium(Capsule):
    """2-D stadium: segment [-a, a] x {0} thickened by a unit disk.

    The cap radius is fixed at 1.  Flat top and bottom edges meet circular
    caps of curvature 1; the set is not uniformly convex, but selection is
    still sharp near cap points because atoms falling on the far structure
    keep a positive support gap.
    """

    kind = "stadium"

    def __init__(self, half_length: float, tie_break: str = "lex-min"):
        if not (np.isfinite(half_length) and half_length > 0):
            raise ValueError(f"half_length must be positive, got {half_length}")
        self.half_length = float(half_length)
        super().__init__(
            [-self.half_length, 0.0], [self.half_length, 0.0], 1.0, tie_break=tie_break
        )

    def descriptor(self) -> dict:
        return {"kind": self.kind, "half_length": self.half_length}


class TruncatedDisk(FeasibleSet):
    """Unit disk cut by a vertical halfplane: B(0,1) intersect {x1 <= b}.

    For unit directions u with u1 <= -b the support point sits on the flat
    facet {b} x [-h, h], h = sqrt(1 - b^2), and the support value is
    b*u1 - h*|u2|; otherwise the free disk atom -u is feasible and returned.
    """

    kind = "truncated_disk"

    def __init__(self, b: float, tie_break: str = "lex-min"):
        if not (np.isfinite(b) and 0.0 < b < 1.0):
            raise ValueError(f"b must lie in (0, 1), got {b}")
        self.b = float(b)
        self.h = math.sqrt(1.0 - b * b)
        self.dim = 2
        self.tie_break = _check_tie_break(tie_break)

    def lmo(self, g) -> np.ndarray:
        g = as_vector(g, 2, "g")
        u = _unit(g)
        if u is None:
            return np.array([-1.0, 0.0])  # canonical: -e1 (always feasible)
        s = -u
        if s[0] <= self.b:
            return s
        if g[1] > 0:
            t = -self.h
        elif g[1] < 0:
            t = self.h
        else:
            # Whole facet ties; lex-min picks the lower corner.
            t = -self.h if self.tie_break == "lex-min" else self.h
        return np.array([self.b, t])

    def distance(self, x) -> float:
        x = as_vector(x, 2)
        r = float(np.linalg.norm(x))
        if x[0] <= self.b and r <= 1.0:
            return 0.0
        if r > 1.0 and x[0] <= self.b * r:
            return r - 1.0  # disk projection stays in the halfplane
        if x[0] > self.b and math.hypot(self.b, x[1]) <= 1.0:
            return x[0] - self.b  # facet projection stays in the disk
        corner = np.array([self.b, math.copysign(self.h, x[1])])
        return float(np.linalg.norm(x - corner))

    def diameter(self) -> float:
        # b > 0 leaves an antipodal pair on the arc, e.g. (0, 1) and (0, -1).
        return 2.0

    def descriptor(self) -> dict:
        return {"kind": self.kind, "b": self.b}


class SuperflatBody(FeasibleSet):
    """Strictly convex 2-D probe whose boundary is flat to every finite order.

    Near the origin the lower boundary follows y = exp(-1/x^2): strictly
    convex, yet the support gap under the vertical direction at a boundary
    point with offset u is exp(-1/u^2), which is o(|u|^q) for every exponent
    q.  No finite-exponent sharpness certificate can hold at the flat point,
    which is what the probe is for.

    The body is closed off by a concave circular arc; the LMO minimizes
    <g, boundary(tau)> by a coarse scan plus interval shrinking to parameter
    tolerance 1e-12.  Outside-distance queries are approximate (documented on
    `distance`); the probe is meant for certification experiments, not for
    running the solver at scale.
    """

    kind = "superflat"

    _GRID = 4096
    _PARAM_TOL = 1e-12

    def __init__(self, scale: float = 1.0):
        if not (np.isfinite(scale) and 0.0 < scale <= 1.5):
            # w <= 0.75 keeps the profile convex (convexity fails past sqrt(2/3)).
            raise ValueError(f"scale must lie in (0, 1.5], got {scale}")
        self.scale = float(scale)
        self.w = 0.5 * self.scale
        self.dim = 2
        self.y_w = self._profile(self.w)
        self._R = 2.0 * self.w
        self._yc = self.y_w - self.w * math.sqrt(3.0)
        taus = np.arange(self._GRID) / self._GRID
        self._grid = np.array([self._point(t) for t in taus])
        pts = self._grid[::8]
        d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
        self._diameter = math.sqrt(float(d2.max()))

    @staticmethod
    def _profile(x: float) -> float:
        if x == 0.0:
            return 0.0
        return math.exp(-1.0 / (x * x))

    def _arc_y(self, x: float) -> float:
        return self._yc + math.sqrt(max(self._R * self._R - x * x, 0.0))

    def _point(self, tau: float) -> np.ndarray:
        """Closed boundary curve: lower profile for tau in [0, 1/2), arc after."""
        tau = tau % 1.0
        if tau < 0.5:
            x = -self.w + 4.0 * tau * self.w
            return np.array([x, self._profile(x)])
        # Arc from (w, y_w) back to (-w, y_w); angle pi/3 .. 2pi/3.
        theta = math.pi / 3.0 + (tau - 0.5) * 2.0 * (math.pi / 3.0)
        return np.array([self._R * math.cos(theta), self._yc + self._R * math.sin(theta)])

    def boundary(self, n: int = 512) -> np.ndarray:
        return np.array([self._point(t) for t in np.arange(n) / n])

    def lmo(self, g) -> np.ndarray:
        g = as_vector(g, 2, "g")
        if not np.any(g):
            return np.array([0.0, 0.0])  # canonical: the flat point
        vals = self._grid @ g
        i = int(np.argmin(vals))
        lo = (i - 1) / self._GRID
        hi = (i + 1) / self._GRID
        # Golden-ratio-free trisection: the support objective is unimodal on
        # the bracket once the coarse scan has isolated the basin.
        while hi - lo > self._PARAM_TOL:
            m1 = lo + (hi - lo) / 3.0
            m2 = hi - (hi - lo) / 3.0
            if float(self._point(m1) @ g) <= float(self._point(m2) @ g):
                hi = m2
            else:
                lo = m1
        return self._point(0.5 * (lo + hi))

    def distance(self, x) -> float:
        """Zero for interior points (exact region test); outside, the minimum
        of a vertical-gap bound and distances to the arc and junctions."""
        x = as_vector(x, 2)
        x1, y = float(x[0]), float(x[1])
        if abs(x1) <= self.w and self._profile(x1) <= y <= self._arc_y(x1):
            return 0.0
        cands = []
        if abs(x1) <= self.w:
            lo = self._profile(x1)
            if y < lo:
                cands.append(lo - y)  # vertical gap; upper bound on the distance
        rc = math.hypot(x1, y - self._yc)
        theta = math.atan2(y - self._yc, x1) if rc > 0 else 0.0
        if math.pi / 3.0 <= theta <= 2.0 * math.pi / 3.0:
            cands.append(abs(rc - self._R))
        for jx in (-self.w, self.w):
            cands.append(math.hypot(x1 - jx, y - self.y_w))
        cands.append(math.hypot(x1, y))
        return min(cands)

    def diameter(self) -> float:
        return self._diameter

    def descriptor(self) -> dict:
        return {"kind": self.kind, "scale": self.scale}


def superflat_body(scale: float = 1.0) -> SuperflatBody:
    """Construct the strictly-convex-but-not-sharp probe body."""
    return SuperflatBody(scale)
