"""
Tests for constraint sets, projections and the image of K under q
"""

import numpy as np
import pytest

from errors import ConfigurationError, RejectedInputError
from models.domain import Box, PositiveLpBall, SmoothedSimplex, make_domain
from models.regularizer import Euclidean, LogBarrier, NegativeEntropy, Tempered
from models.reparam import Exponential, Identity, Power, QuarterSquare
from services.projection_service import ProjectionService, project_simplex


# ============================================================================
# DOMAINS
# ============================================================================

def test_smoothed_simplex_membership():
    domain = SmoothedSimplex(dimension=3, eps_min=0.01)
    assert ProjectionService.membership(domain, [0.2, 0.3, 0.4])
    assert not ProjectionService.membership(domain, [0.005, 0.3, 0.4])
    assert not ProjectionService.membership(domain, [0.5, 0.3, 0.4])
    assert not ProjectionService.membership(domain, [0.2, 0.3])
    assert not ProjectionService.membership(domain, [np.nan, 0.3, 0.4])


def test_empty_smoothed_simplex_is_rejected():
    """Test d * eps_min >= 1 leaves nothing to play"""
    with pytest.raises(ConfigurationError):
        SmoothedSimplex(dimension=4, eps_min=0.25)


def test_box_requires_ordered_bounds():
    with pytest.raises(ConfigurationError):
        Box(lo=(0.5, 0.1), hi=(0.4, 1.0))


def test_lp_ball_rejects_floor_outside_radius():
    with pytest.raises(ConfigurationError):
        PositiveLpBall(dimension=2, p=2.0, radius=1.0, floor=0.8)


@pytest.mark.parametrize("domain", [
    SmoothedSimplex(dimension=3, eps_min=1e-3),
    Box.uniform(3, 0.01, 1.0),
    PositiveLpBall(dimension=3, p=1.5, radius=1.0, floor=0.01),
])
def test_center_and_interior_samples_are_members(domain):
    assert domain.membership(domain.center())
    samples = domain.sample_interior(np.random.default_rng(0), 200, 0.05)
    assert np.all(domain.contains(samples))


def test_domain_centers():
    np.testing.assert_allclose(ProjectionService.domain_center(SmoothedSimplex(dimension=2, eps_min=1e-3)), [0.25, 0.25])
    np.testing.assert_allclose(ProjectionService.domain_center(SmoothedSimplex(dimension=4, eps_min=0.2)), [0.2] * 4)
    np.testing.assert_allclose(ProjectionService.domain_center(Box.uniform(2, 0.1, 1.0)), [0.55, 0.55])
    ball = PositiveLpBall(dimension=4, p=2.0, radius=2.0)
    np.testing.assert_allclose(ProjectionService.domain_center(ball), [0.5] * 4)


def test_make_domain_names():
    assert make_domain("simplex", 2, eps_min=0.1).kind == "smoothed-simplex"
    assert make_domain("box", 2, eps_min=0.1).kind == "box"
    assert make_domain("lp-ball", 2, p=3.0).kind == "positive-lp-ball"
    with pytest.raises(ConfigurationError):
        make_domain("torus", 2)


def test_simplex_diameter():
    domain = SmoothedSimplex(dimension=2, eps_min=0.0)
    assert domain.diameter() == pytest.approx(np.sqrt(2.0))


def test_lp_ball_diameter_bounds_every_pair(rng):
    assert PositiveLpBall(dimension=2, p=2.0, radius=1.0).diameter() == pytest.approx(np.sqrt(2.0))
    assert PositiveLpBall(dimension=3, p=1.0, radius=2.0).diameter() == pytest.approx(2.0 * np.sqrt(2.0))
    for ball in (PositiveLpBall(dimension=2, p=4.0, radius=1.0),
                 PositiveLpBall(dimension=3, p=3.0, radius=1.0, floor=0.05)):
        pts = np.vstack([ball.sample_interior(rng, 400, 0.0), ball.extreme_points()])
        widest = np.max(np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1))
        assert widest <= ball.diameter()
    # e_1 to e_2 is the widest pair of the l4 quarter disk; the bound is loose there
    assert PositiveLpBall(dimension=2, p=4.0, radius=1.0).diameter() > np.sqrt(2.0) + 0.1


# ============================================================================
# EUCLIDEAN PROJECTION
# ============================================================================

def test_project_simplex_sort_based():
    w, theta = project_simplex(np.array([0.8, 0.6, -0.2]), 1.0)
    np.testing.assert_allclose(w, [0.6, 0.4, 0.0])
    assert theta == pytest.approx(0.2)


def test_euclid_project_onto_filled_simplex():
    """Test points inside are untouched and points above the face land on it"""
    domain = SmoothedSimplex(dimension=2, eps_min=0.01)
    inside = ProjectionService.euclid_project(domain, [0.2, 0.3])
    np.testing.assert_array_equal(inside.point, [0.2, 0.3])

    result = ProjectionService.euclid_project(domain, [0.8, 0.6])
    np.testing.assert_allclose(result.point, [0.6, 0.4], atol=1e-12)
    assert result.multiplier > 0

    below = ProjectionService.euclid_project(domain, [-1.0, 0.3])
    np.testing.assert_allclose(below.point, [0.01, 0.3])


def test_euclid_project_onto_box():
    domain = Box.uniform(2, 0.1, 1.0)
    result = ProjectionService.euclid_project(domain, [-3.0, 0.5])
    np.testing.assert_allclose(result.point, [0.1, 0.5])


def test_euclid_project_onto_l2_ball():
    domain = PositiveLpBall(dimension=2, p=2.0, radius=1.0)
    result = ProjectionService.euclid_project(domain, [3.0, 4.0])
    np.testing.assert_allclose(result.point, [0.6, 0.8])


def test_euclid_project_onto_general_lp_ball():
    """Test the KKT solver on a p = 3 ball with a floor"""
    domain = PositiveLpBall(dimension=3, p=3.0, radius=1.0, floor=0.01)
    result = ProjectionService.euclid_project(domain, [2.0, 1.0, -1.0])
    assert domain.membership(result.point, 1e-9)
    assert domain.norm(result.point) == pytest.approx(1.0, abs=1e-9)
    assert result.point[2] == pytest.approx(0.01)


def test_euclid_projection_is_closest_point(rng):
    """Test the projection beats random feasible points"""
    domain = PositiveLpBall(dimension=2, p=1.5, radius=1.0)
    v = np.array([1.5, 0.7])
    x = ProjectionService.euclid_project(domain, v).point
    others = domain.sample_interior(rng, 500, 0.0)
    assert np.all(np.linalg.norm(others - v, axis=1) >= np.linalg.norm(x - v) - 1e-9)


def test_euclid_project_rejects_nonfinite():
    with pytest.raises(RejectedInputError):
        ProjectionService.euclid_project(Box.uniform(2, 0.0, 1.0), [np.inf, 0.0])


# ============================================================================
# BREGMAN PROJECTION
# ============================================================================

def test_entropy_projection_normalizes():
    """Test that the KL projection onto the simplex face is a rescaling"""
    domain = SmoothedSimplex(dimension=2, eps_min=1e-3)
    result = ProjectionService.bregman_project(NegativeEntropy(), domain, [0.6, 0.9])
    np.testing.assert_allclose(result.point, [0.4, 0.6], atol=1e-12)


def test_entropy_projection_respects_floor():
    domain = SmoothedSimplex(dimension=3, eps_min=0.05)
    result = ProjectionService.bregman_project(NegativeEntropy(), domain, [0.001, 1.0, 1.0])
    assert result.point[0] == pytest.approx(0.05)
    assert np.sum(result.point) == pytest.approx(1.0, abs=1e-10)


def test_log_barrier_projection_on_box_clamps():
    domain = Box.uniform(2, 0.1, 1.0)
    result = ProjectionService.bregman_project(LogBarrier(), domain, [0.05, 2.0])
    np.testing.assert_allclose(result.point, [0.1, 1.0])


def test_tempered_projection_onto_lp_ball():
    domain = PositiveLpBall(dimension=2, p=2.0, radius=1.0)
    result = ProjectionService.bregman_project(Tempered(tau=0.5), domain, [1.0, 0.5])
    assert domain.norm(result.point) == pytest.approx(1.0, abs=1e-9)
    assert np.all(result.point > 0)


def test_tempered_projection_minimizes_divergence(rng):
    domain = PositiveLpBall(dimension=2, p=2.0, radius=1.0)
    reg = Tempered(tau=0.5)
    y = np.array([1.0, 0.5])
    x = ProjectionService.bregman_project(reg, domain, y).point
    others = domain.sample_interior(rng, 500, 0.0)
    assert np.all(reg.bregman(others, y) >= reg.bregman(x, y) - 1e-9)


def test_euclidean_regularizer_uses_euclid_projection():
    domain = SmoothedSimplex(dimension=2, eps_min=0.01)
    a = ProjectionService.bregman_project(Euclidean(), domain, [0.8, 0.6]).point
    b = ProjectionService.euclid_project(domain, [0.8, 0.6]).point
    np.testing.assert_array_equal(a, b)


def test_bregman_projection_rejects_nonpositive_input():
    domain = SmoothedSimplex(dimension=2, eps_min=0.01)
    with pytest.raises(RejectedInputError):
        ProjectionService.bregman_project(NegativeEntropy(), domain, [0.0, 2.0])


# ============================================================================
# DOMAIN IMAGES
# ============================================================================

def test_map_domain_identity_is_same_domain():
    domain = SmoothedSimplex(dimension=2, eps_min=0.01)
    assert ProjectionService.map_domain(Identity(), domain) is domain


def test_map_domain_quarter_square_simplex():
    """Test the filled simplex maps to a floored l2 ball of radius 2"""
    image = ProjectionService.map_domain(QuarterSquare(), SmoothedSimplex(dimension=2, eps_min=0.01))
    assert isinstance(image, PositiveLpBall)
    assert image.p == pytest.approx(2.0)
    assert image.radius == pytest.approx(2.0)
    assert image.floor == pytest.approx(0.2)


def test_map_domain_exponential_box():
    image = ProjectionService.map_domain(Exponential(), Box.uniform(2, 0.1, 1.0))
    np.testing.assert_allclose(image.lo, [np.log(0.1)] * 2)
    np.testing.assert_allclose(image.hi, [0.0, 0.0])


def test_map_domain_power_ball():
    tau = 0.5
    k = 2.0 / (2.0 - tau)
    image = ProjectionService.map_domain(Power(tau=tau), PositiveLpBall(dimension=2, p=2.0, radius=1.0))
    assert image.p == pytest.approx(2.0 * k)
    assert image.radius == pytest.approx(k)


def test_map_domain_unsupported_combination():
    with pytest.raises(ConfigurationError):
        ProjectionService.map_domain(Exponential(), SmoothedSimplex(dimension=2, eps_min=0.01))
    with pytest.raises(ConfigurationError):
        ProjectionService.map_domain(Exponential(), PositiveLpBall(dimension=2))


# ============================================================================
# GRID
# ============================================================================

def test_grid_points_are_feasible():
    domain = SmoothedSimplex(dimension=2, eps_min=0.0)
    points, spacing = ProjectionService.grid_points(domain, resolution=0.1)
    assert spacing == pytest.approx(0.1)
    assert np.all(domain.contains(points, 1e-12))
    # 11 + 10 + ... + 1 lattice points under the face
    assert len(points) == 66


def test_grid_is_coarsened_to_cap():
    domain = Box.uniform(3, 0.0, 1.0)
    points, spacing = ProjectionService.grid_points(domain, resolution=1e-3, max_points=1000)
    assert spacing > 1e-3
    assert len(points) <= 1000


# ============================================================================
# PROJECTION PROPERTIES
# ============================================================================

PROJECTION_DOMAINS = [
    pytest.param(SmoothedSimplex(dimension=3, eps_min=0.01), id="simplex"),
    pytest.param(Box(lo=(0.1, -0.5, 0.0), hi=(1.0, 0.5, 2.0)), id="box"),
    pytest.param(PositiveLpBall(dimension=3, p=2.0, radius=1.0), id="l2-ball"),
    pytest.param(PositiveLpBall(dimension=3, p=3.0, radius=1.0, floor=0.02), id="l3-ball-floor"),
    pytest.param(PositiveLpBall(dimension=3, p=1.5, radius=2.0), id="l1.5-ball"),
]

BREGMAN_CASES = [
    pytest.param(NegativeEntropy(), SmoothedSimplex(dimension=3, eps_min=0.01), id="entropy-simplex"),
    pytest.param(LogBarrier(), Box.uniform(3, 0.1, 1.0), id="logbarrier-box"),
    pytest.param(Tempered(tau=0.5), PositiveLpBall(dimension=3, p=2.0, radius=1.0), id="tempered-l2-ball"),
    pytest.param(NegativeEntropy(), PositiveLpBall(dimension=3, p=1.0, radius=1.0, floor=0.01), id="entropy-l1-ball"),
]


def scattered(domain, rng, n, scale=0.8):
    """Points around the center, many of them outside the domain"""
    return domain.center() + scale * rng.standard_normal((n, domain.dimension))


def positive_points(domain, rng, n):
    return rng.uniform(0.02, 1.5, size=(n, domain.dimension))


@pytest.mark.parametrize("domain", PROJECTION_DOMAINS)
def test_euclid_projection_is_idempotent(domain, rng):
    for v in scattered(domain, rng, 500):
        x = ProjectionService.euclid_project(domain, v).point
        assert domain.membership(x, 1e-9)
        np.testing.assert_allclose(ProjectionService.euclid_project(domain, x).point, x, atol=1e-9)


@pytest.mark.parametrize("reg,domain", BREGMAN_CASES)
def test_bregman_projection_is_idempotent(reg, domain, rng):
    for y in positive_points(domain, rng, 500):
        x = ProjectionService.bregman_project(reg, domain, y).point
        assert domain.membership(x, 1e-9)
        np.testing.assert_allclose(ProjectionService.bregman_project(reg, domain, x).point, x, atol=1e-9)


@pytest.mark.parametrize("domain", PROJECTION_DOMAINS)
def test_euclid_projection_is_nonexpansive(domain, rng):
    V = scattered(domain, rng, 400, scale=1.5)
    P = np.array([ProjectionService.euclid_project(domain, v).point for v in V])
    moved = np.linalg.norm(P[:200] - P[200:], axis=1)
    assert np.all(moved <= np.linalg.norm(V[:200] - V[200:], axis=1) + 1e-9)


@pytest.mark.parametrize("reg,domain", BREGMAN_CASES)
def test_bregman_projection_satisfies_pythagoras(reg, domain, rng):
    """Test D(z, y) >= D(z, P(y)) + D(P(y), y) for every z in the domain"""
    Z = domain.sample_interior(rng, 25, 0.0)
    for y in positive_points(domain, rng, 200):
        x = ProjectionService.bregman_project(reg, domain, y).point
        lhs = reg.bregman(Z, y)
        rhs = reg.bregman(Z, x) + reg.bregman(x, y)
        assert np.all(lhs >= rhs - 1e-8 * np.maximum(1.0, np.abs(lhs)))


@pytest.mark.parametrize("domain,v", [
    pytest.param(SmoothedSimplex(dimension=1, eps_min=0.05), [1.7], id="simplex-1d"),
    pytest.param(Box.uniform(1, 0.1, 1.0), [-0.4], id="box-1d"),
    pytest.param(PositiveLpBall(dimension=1, p=3.0, radius=1.0, floor=0.2), [0.05], id="ball-1d"),
    pytest.param(SmoothedSimplex(dimension=2, eps_min=0.01), [0.8, 0.6], id="simplex-2d"),
    pytest.param(Box(lo=(0.1, 0.0), hi=(1.0, 0.5)), [1.4, -0.3], id="box-2d"),
    pytest.param(PositiveLpBall(dimension=2, p=3.0, radius=1.0, floor=0.05), [1.5, 0.7], id="l3-ball-2d"),
    pytest.param(PositiveLpBall(dimension=2, p=1.5, radius=1.0), [0.9, 0.9], id="l1.5-ball-2d"),
])
def test_euclid_projection_matches_grid_search(domain, v):
    v = np.asarray(v, dtype=float)
    x = ProjectionService.euclid_project(domain, v).point
    grid, h = ProjectionService.grid_points(domain, resolution=2e-3)
    distances = np.linalg.norm(grid - v, axis=1)
    best = int(np.argmin(distances))
    projected = float(np.linalg.norm(x - v))
    assert distances[best] >= projected - 1e-9
    assert distances[best] <= projected + 2.0 * h * np.sqrt(domain.dimension)
    if domain.dimension == 1:
        np.testing.assert_allclose(grid[best], x, atol=h)


@pytest.mark.parametrize("reg,domain,y", [
    pytest.param(NegativeEntropy(), SmoothedSimplex(dimension=1, eps_min=0.05), [2.5], id="entropy-1d"),
    pytest.param(LogBarrier(), Box.uniform(1, 0.1, 1.0), [0.03], id="logbarrier-1d"),
    pytest.param(Tempered(tau=0.5), PositiveLpBall(dimension=1, p=2.0, radius=1.0), [1.7], id="tempered-1d"),
    pytest.param(NegativeEntropy(), SmoothedSimplex(dimension=2, eps_min=0.01), [0.9, 0.6], id="entropy-2d"),
    pytest.param(LogBarrier(), Box.uniform(2, 0.1, 1.0), [0.05, 2.0], id="logbarrier-2d"),
    pytest.param(Tempered(tau=0.5), PositiveLpBall(dimension=2, p=2.0, radius=1.0), [1.0, 0.5], id="tempered-2d"),
])
def test_bregman_projection_matches_grid_search(reg, domain, y):
    y = np.asarray(y, dtype=float)
    x = ProjectionService.bregman_project(reg, domain, y).point
    grid, h = ProjectionService.grid_points(domain, resolution=2e-3)
    divergences = reg.bregman(grid, y)
    best = int(np.argmin(divergences))
    projected = float(reg.bregman(x, y))
    assert divergences[best] >= projected - 1e-9
    assert divergences[best] <= projected + 0.05
    if domain.dimension == 1:
        np.testing.assert_allclose(grid[best], x, atol=h)
