"""Objective tests: gradients against central differences, curvature constants
against sampled secants, and the intrinsic certificates against their
definitions."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fwlab.geometry import Simplex, project_simplex
from fwlab.objectives import (
    DistancePower,
    GroundTruth,
    HebCertificate,
    Linear,
    Quadratic,
    StadiumPsi,
    psi,
    psi_prime,
    validate_heb,
)

# --- oracle: central finite differences --------------------------------------


def fd_grad(f, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.shape[0]):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def _random_psd(dim, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((dim, dim))
    return A.T @ A / dim


OBJECTIVE_CASES = [
    ("quadratic", Quadratic(_random_psd(4, 0), np.array([0.3, -1.0, 0.0, 2.0])), 4),
    ("linear", Linear([1.5, -0.5, 2.0]), 3),
    ("dist-r2", DistancePower([0.2, -0.4], r=2.0), 2),
    ("dist-r3", DistancePower([0.0, 0.0, 1.0], r=3.0, radius_bound=4.0), 3),
    ("dist-r4", DistancePower([1.0, 0.0], r=4.0, radius_bound=3.0), 2),
    ("stadium-psi", StadiumPsi(c=2.0), 2),
]


@pytest.mark.parametrize("label,obj,dim", OBJECTIVE_CASES, ids=lambda c: c if isinstance(c, str) else "")
def test_grad_matches_central_differences(label, obj, dim):
    rng = np.random.default_rng(11)
    for _ in range(25):
        x = rng.uniform(-1.5, 1.5, size=dim)
        g = obj.grad(x)
        g_fd = fd_grad(obj.value, x)
        scale = max(1.0, float(np.linalg.norm(g)))
        assert np.allclose(g, g_fd, atol=1e-5 * scale), f"{label} grad mismatch at {x}"


@pytest.mark.parametrize("label,obj,dim", OBJECTIVE_CASES, ids=lambda c: c if isinstance(c, str) else "")
def test_line_derivative_matches_grad_chain_rule(label, obj, dim):
    rng = np.random.default_rng(12)
    for _ in range(20):
        x = rng.uniform(-1.0, 1.0, size=dim)
        d = rng.uniform(-1.0, 1.0, size=dim)
        dphi = obj.line_derivative(x, d)
        for gamma in (0.0, 0.25, 0.8):
            direct = float(obj.grad(x + gamma * d) @ d)
            assert dphi(gamma) == pytest.approx(direct, abs=1e-10 * max(1.0, abs(direct)))


@pytest.mark.parametrize("label,obj,dim", OBJECTIVE_CASES, ids=lambda c: c if isinstance(c, str) else "")
def test_midpoint_convexity_sampled(label, obj, dim):
    rng = np.random.default_rng(13)
    for _ in range(50):
        x = rng.uniform(-1.5, 1.5, size=dim)
        y = rng.uniform(-1.5, 1.5, size=dim)
        mid = obj.value(0.5 * (x + y))
        assert mid <= 0.5 * obj.value(x) + 0.5 * obj.value(y) + 1e-10


@pytest.mark.parametrize(
    "label,obj,dim,box",
    [
        ("quadratic", OBJECTIVE_CASES[0][1], 4, 10.0),
        ("dist-r2", OBJECTIVE_CASES[2][1], 2, 10.0),
        # r > 2: L is stated for ||x - anchor|| <= radius_bound only.
        ("dist-r3", OBJECTIVE_CASES[3][1], 3, 4.0 / math.sqrt(3.0)),
        ("stadium-psi", OBJECTIVE_CASES[5][1], 2, 1.0),
    ],
    ids=lambda c: c if isinstance(c, str) else "",
)
def test_gradient_lipschitz_constant_sampled(label, obj, dim, box):
    rng = np.random.default_rng(14)
    for _ in range(200):
        x = rng.uniform(-box, box, size=dim)
        y = rng.uniform(-box, box, size=dim)
        if label.startswith("dist-r3"):
            x = obj.anchor + x
            y = obj.anchor + y
        lhs = float(np.linalg.norm(obj.grad(x) - obj.grad(y)))
        rhs = obj.L * float(np.linalg.norm(x - y))
        assert lhs <= rhs * (1.0 + 1e-9) + 1e-12


def test_quadratic_smoothness_is_top_eigenvalue():
    Q = np.diag([3.0, 1.0, 0.5])
    assert Quadratic(Q, np.zeros(3)).L == 3.0


def test_distance_power_smoothness_constants():
    assert DistancePower([0.0], r=2.0).L == 2.0
    # L = r (r-1) radius^(r-2) for r > 2.
    assert DistancePower([0.0], r=4.0, radius_bound=3.0).L == pytest.approx(12.0 * 9.0)
    with pytest.raises(ValueError):
        DistancePower([0.0], r=3.0)  # needs radius_bound or explicit L
    # Explicit L wins (the experiment CLI exposes it as a tunable).
    assert DistancePower([0.0], r=2.0, L=1e-9).L == 1e-9


# --- psi helper ----------------------------------------------------------------


def test_psi_known_values_and_oddness():
    assert psi(0.0) == 0.0
    assert psi(2.0) == pytest.approx(2.0 - math.atan(2.0), rel=1e-15)
    for u in (0.3, 1.0, 5.0):
        assert psi(-u) == pytest.approx(-psi(u), rel=1e-12)
        assert psi(u) > 0.0


def test_psi_series_agrees_with_direct_branch():
    # The series branch switches at |u| = 1e-3; both sides must agree there
    # despite the catastrophic cancellation in the direct formula.
    for u in (9.9e-4, 1.01e-3, 5e-4):
        series = psi(u)
        direct = u - math.atan(u)
        assert series == pytest.approx(direct, rel=1e-5)
    # Far from the switch the direct branch is exact; sanity-check the series
    # polynomial against it at the largest series input.
    assert psi(9e-4) == pytest.approx(9e-4 - math.atan(9e-4), rel=1e-5)


@given(u=st.floats(-10.0, 10.0, allow_nan=False))
def test_psi_prime_is_bounded_derivative(u):
    p = psi_prime(u)
    assert 0.0 <= p < 1.0
    h = 1e-6
    fd = (psi(u + h) - psi(u - h)) / (2.0 * h)
    assert p == pytest.approx(fd, abs=1e-8)


# --- frozen values ---------------------------------------------------------------


def test_stadium_psi_frozen_value_and_apex_gradient():
    obj = StadiumPsi(c=2.0)
    # 0.5 * 1 + (2 - atan 2), written out as the oracle.
    assert obj.value([0.0, 1.0]) == pytest.approx(0.5 + 2.0 - math.atan(2.0), rel=1e-15)
    assert obj.value([0.0, 1.0]) == 1.3928512822059096
    # The right cap apex of the paired stadium is a stationary feasible point.
    assert np.allclose(obj.grad([2.0, 0.0]), [0.0, 0.0], atol=0.0)
    assert obj.grad([0.0, 0.5])[0] == pytest.approx(-4.0 / 5.0, rel=1e-15)


def test_simplex_vertex_gap_matches_grid_oracle():
    # 0.5||x||^2 over the simplex: sampled minimum approaches 1/(2d), so the
    # primal gap at a vertex is 0.5 - 1/(2d) = (1 - 1/d)/2.
    d = 6
    obj = Quadratic(np.eye(d), np.zeros(d))
    rng = np.random.default_rng(15)
    samples = np.vstack([
        rng.dirichlet(np.ones(d), size=4000),
        project_simplex(np.full(d, 1.0 / d)),
    ])
    grid_min = min(obj.value(x) for x in samples)
    assert grid_min == pytest.approx(1.0 / (2 * d), abs=1e-4)
    vertex = Simplex(d).lmo(np.zeros(d))
    gap_vertex = obj.value(vertex) - 1.0 / (2 * d)
    assert gap_vertex == pytest.approx((1.0 - 1.0 / d) / 2.0, abs=1e-12)


# --- ground truth and certificates ------------------------------------------------


def test_distance_power_ground_truth_is_intrinsic():
    obj = DistancePower([0.5, 0.5], r=3.0, radius_bound=2.0)
    gt = obj.ground_truth
    assert gt is not None
    assert gt.f_star == 0.0
    assert np.array_equal(gt.minimizers, [[0.5, 0.5]])
    assert gt.heb.B == 1.0 and gt.heb.r == 3.0
    assert DistancePower([0.0], r=2.0, anchor_feasible=False).ground_truth is None


def test_distance_power_heb_is_exact_equality():
    obj = DistancePower([0.25, -0.5], r=3.0, radius_bound=4.0)
    rng = np.random.default_rng(16)
    pts = rng.uniform(-1.0, 1.0, size=(200, 2))
    ok, worst, _ = validate_heb(obj, pts)
    assert ok
    # dist^r == f - f* exactly, so the worst margin is pure round-off.
    assert abs(worst) < 1e-12


def test_validate_heb_flags_a_false_certificate():
    gt = GroundTruth(f_star=0.0, minimizers=[[0.0, 0.0]],
                     heb=HebCertificate(B=0.1, r=2.0, rho=10.0))
    bad = DistancePower([0.0, 0.0], r=2.0)
    bad.ground_truth = gt
    ok, worst, worst_x = validate_heb(bad, [[0.5, 0.0], [0.0, 0.9]])
    assert not ok
    assert worst > 0.0
    assert worst_x is not None


def test_validate_heb_skips_points_outside_rho():
    gt = GroundTruth(f_star=0.0, minimizers=[[0.0]],
                     heb=HebCertificate(B=1e-6, r=2.0, rho=0.5))
    obj = DistancePower([0.0], r=2.0)
    obj.ground_truth = gt
    # The certificate is false, but the only supplied point is outside rho.
    ok, worst, _ = validate_heb(obj, [[3.0]])
    assert ok and worst == -math.inf


def test_primal_gap_clips_round_off_and_rejects_bad_f_star():
    obj = Quadratic(np.eye(2), np.zeros(2),
                    ground_truth=GroundTruth(f_star=1e-13, minimizers=[[0.0, 0.0]]))
    assert obj.primal_gap([0.0, 0.0]) == 0.0  # f - f* = -1e-13, clipped
    obj_bad = Quadratic(np.eye(2), np.zeros(2),
                        ground_truth=GroundTruth(f_star=1.0, minimizers=[[0.0, 0.0]]))
    with pytest.raises(ValueError, match="negative beyond round-off"):
        obj_bad.primal_gap([0.0, 0.0])
    with pytest.raises(ValueError, match="no ground truth"):
        Linear([1.0]).primal_gap([0.0])


def test_ground_truth_distance_uses_nearest_witness():
    gt = GroundTruth(f_star=0.0, minimizers=[[0.0, 0.0], [2.0, 0.0]])
    assert gt.distance(np.array([1.4, 0.0])) == pytest.approx(0.6, abs=1e-15)


def test_ground_truth_without_witnesses():
    """f* alone supports primal gaps; distance queries must refuse."""
    gt = GroundTruth(f_star=-0.5)
    obj = Linear([1.0, 0.0], ground_truth=gt)
    assert obj.primal_gap([-0.5, 0.3]) == 0.0
    with pytest.raises(ValueError, match="witness"):
        gt.distance(np.zeros(2))
    with pytest.raises(ValueError, match="witness"):
        obj.dist_to_minimizers(np.zeros(2))


def test_certificate_validation():
    with pytest.raises(ValueError):
        HebCertificate(B=0.0, r=2.0, rho=1.0)
    with pytest.raises(ValueError):
        HebCertificate(B=1.0, r=1.5, rho=1.0)
    with pytest.raises(ValueError):
        HebCertificate(B=1.0, r=2.0, rho=0.0)
    with pytest.raises(ValueError):
        GroundTruth(f_star=math.nan, minimizers=[[0.0]])
    with pytest.raises(ValueError):
        GroundTruth(f_star=0.0, minimizers=[[math.inf]])
    with pytest.raises(ValueError):
        validate_heb(Linear([1.0]), [[0.0]])


def test_constructor_validation():
    with pytest.raises(ValueError):
        Quadratic(np.ones((2, 3)), np.zeros(2))
    with pytest.raises(ValueError):
        Quadratic([[1.0, 2.0], [0.0, 1.0]], np.zeros(2))
    with pytest.raises(ValueError):
        Quadratic([[-1.0]], [0.0])
    with pytest.raises(ValueError):
        Linear([1.0], L=0.0)
    with pytest.raises(ValueError):
        DistancePower([0.0], r=1.0)
    with pytest.raises(ValueError):
        StadiumPsi(c=1.0)


# --- hypothesis ---------------------------------------------------------------


@settings(max_examples=200)
@given(
    x=st.lists(st.floats(-100.0, 100.0, allow_nan=False), min_size=2, max_size=2),
    ax=st.floats(-5.0, 5.0, allow_nan=False),
    ay=st.floats(-5.0, 5.0, allow_nan=False),
)
def test_distance_square_gradient_identity(x, ax, ay):
    obj = DistancePower([ax, ay], r=2.0)
    xv = np.asarray(x)
    assert np.array_equal(obj.grad(xv), 2.0 * (xv - obj.anchor))


@settings(max_examples=100)
@given(st.lists(st.floats(-10.0, 10.0, allow_nan=False), min_size=3, max_size=3))
def test_quadratic_value_matches_explicit_sum(x):
    Q = _random_psd(3, 21)
    obj = Quadratic(Q, np.zeros(3))
    xv = np.asarray(x)
    explicit = 0.5 * sum(Q[i, j] * xv[i] * xv[j] for i in range(3) for j in range(3))
    assert obj.value(xv) == pytest.approx(explicit, rel=1e-12, abs=1e-12)
