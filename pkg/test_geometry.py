"""
Tests for regularizers, reparameterizations and the geometry identity
"""

import numpy as np
import pytest

from config import Config
from errors import ConfigurationError, NumericalFailure, RejectedInputError
from models.geometry_pair import GeometryPair
from models.loss import QuadraticLoss
from models.regularizer import Euclidean, LogBarrier, NegativeEntropy, Tempered
from models.reparam import Exponential, Identity, Power, QuarterSquare
from services.geometry_service import GeometryService


# ============================================================================
# BREGMAN DIVERGENCE
# ============================================================================

def test_entropy_bregman_is_kl():
    """Test D_R for negative entropy against a hand-computed KL value"""
    value = GeometryService.bregman_divergence(NegativeEntropy(), [0.5, 0.5], [0.25, 0.75])
    assert value == pytest.approx(0.5 * np.log(2.0) + 0.5 * np.log(2.0 / 3.0), abs=1e-12)
    assert value == pytest.approx(0.143841, abs=1e-6)


def test_entropy_bregman_at_boundary():
    """Test that 0 ln 0 = 0 is used when x touches the boundary"""
    value = NegativeEntropy().bregman(np.array([0.0, 1.0]), np.array([0.5, 0.5]))
    assert value == pytest.approx(np.log(2.0))


@pytest.mark.parametrize("reg", [NegativeEntropy(), LogBarrier(), Tempered(tau=0.3), Euclidean()])
def test_bregman_nonnegative_and_zero_on_diagonal(reg, rng):
    """Test D_R >= 0 with equality at x = y"""
    for _ in range(20):
        x = rng.uniform(0.05, 1.0, size=3)
        y = rng.uniform(0.05, 1.0, size=3)
        assert GeometryService.bregman_divergence(reg, x, y) >= 0.0
        assert GeometryService.bregman_divergence(reg, x, x) == pytest.approx(0.0, abs=1e-14)


def test_bregman_is_one_strongly_convex_on_paired_domains(all_pairs, rng):
    """Test D_R(x, y) >= ||x - y||^2 / 2 for each built-in (R, K)"""
    for pair in all_pairs:
        domain = pair.primal_domain
        X = np.vstack([domain.sample_interior(rng, 1000, 0.0), domain.extreme_points()])
        Y = domain.sample_interior(rng, X.shape[0], 0.0)
        gap = pair.regularizer.bregman(X, Y) - 0.5 * np.sum((X - Y) ** 2, axis=1)
        assert np.min(gap) >= -1e-12, pair.name


def test_euclidean_bregman_is_half_squared_distance():
    value = GeometryService.bregman_divergence(Euclidean(), [1.0, 2.0], [0.0, 0.0])
    assert value == pytest.approx(2.5)


def test_bregman_rejects_nonpositive_points():
    """Test that log-based regularizers refuse points with a zero coordinate"""
    with pytest.raises(RejectedInputError):
        GeometryService.bregman_divergence(LogBarrier(), [0.0, 1.0], [0.5, 0.5])


def test_bregman_rejects_dimension_mismatch():
    with pytest.raises(RejectedInputError):
        GeometryService.bregman_divergence(NegativeEntropy(), [0.5, 0.5], [0.2, 0.3, 0.5])


# ============================================================================
# LINKS
# ============================================================================

@pytest.mark.parametrize("reg", [NegativeEntropy(), LogBarrier(), Tempered(tau=0.5), Euclidean()])
def test_link_round_trip(reg):
    """Test link_inverse(link(x)) = x on interior points"""
    x = np.array([0.1, 0.4, 0.9])
    back = GeometryService.link_invert(reg, GeometryService.link_apply(reg, x))
    np.testing.assert_allclose(back, x, rtol=1e-12)


def test_log_barrier_link_out_of_range():
    """Test that inverting a nonnegative dual value fails"""
    with pytest.raises(NumericalFailure):
        GeometryService.link_invert(LogBarrier(), [-1.0, 0.5])


def test_tempered_link_out_of_range():
    with pytest.raises(NumericalFailure):
        GeometryService.link_invert(Tempered(tau=0.5), [-3.0, 0.0])


def test_tempered_rejects_tau_one():
    with pytest.raises(RejectedInputError):
        Tempered(tau=1.0)


# ============================================================================
# REPARAMETERIZATIONS
# ============================================================================

@pytest.mark.parametrize("q", [QuarterSquare(), Exponential(), Power(tau=0.5), Identity()])
def test_reparam_round_trip(q):
    x = np.array([0.05, 0.3, 0.8])
    u = GeometryService.reparam_inverse(q, x)
    np.testing.assert_allclose(GeometryService.reparam_forward(q, u), x, rtol=1e-12)


@pytest.mark.parametrize("name", ["eg", "logbarrier", "tempered", "euclid"])
def test_round_trips_on_sampled_points(name, rng):
    """Test q^-1(q(u)) = u and link^-1(link(x)) = x over 1000 points of each pair"""
    pair = GeometryService.build_pair(name, 3, 0.01)
    q, reg = pair.reparam, pair.regularizer
    for u in pair.reparam_domain.sample_interior(rng, 1000, 0.0):
        x = GeometryService.reparam_forward(q, u)
        np.testing.assert_allclose(GeometryService.reparam_inverse(q, x), u, rtol=1e-12, atol=1e-14)
        back = GeometryService.link_invert(reg, GeometryService.link_apply(reg, x))
        np.testing.assert_allclose(back, x, rtol=1e-10)


def test_power_with_tau_one_is_quarter_square():
    u = np.array([0.3, 1.2])
    np.testing.assert_allclose(Power(tau=1.0).forward(u), QuarterSquare().forward(u))


def test_chain_gradient_is_diagonal_multiply():
    """Test J_q(u)^T grad for the quarter-square map"""
    grad = GeometryService.chain_gradient(QuarterSquare(), [2.0, 1.0], [1.0, -1.0])
    np.testing.assert_allclose(grad, [1.0, -0.5])


@pytest.mark.parametrize("name", ["eg", "logbarrier", "tempered", "euclid"])
def test_chain_gradient_matches_central_differences(name, rng):
    """Test J_q(u)^T grad f(q(u)) against central differences of f(q(u))"""
    pair = GeometryService.build_pair(name, 3, 0.01)
    q, h = pair.reparam, 1e-6
    steps = h * np.eye(3)
    for u in pair.reparam_domain.sample_interior(rng, 50, Config.SAMPLE_MARGIN):
        loss = QuadraticLoss(a=rng.standard_normal(3), b=float(rng.uniform(-1.0, 1.0)))
        grad = GeometryService.chain_gradient(q, u, loss.gradient(q.forward(u)))
        numeric = (loss.value_batch(q.forward(u + steps)) - loss.value_batch(q.forward(u - steps))) / (2 * h)
        np.testing.assert_allclose(grad, numeric, atol=1e-6)


def test_reparam_forward_checks_membership(eg_pair):
    with pytest.raises(RejectedInputError):
        GeometryService.reparam_forward(eg_pair.reparam, [5.0, 5.0], eg_pair.reparam_domain)


def test_quarter_square_inverse_rejects_negative():
    with pytest.raises(RejectedInputError):
        QuarterSquare().inverse(np.array([-0.1, 0.2]))


# ============================================================================
# GEOMETRY IDENTITY
# ============================================================================

def test_all_pairs_satisfy_geometry_identity(all_pairs):
    """Test [Hess R(q(u))]^-1 = J_q J_q^T on sampled points of K'"""
    for pair in all_pairs:
        report = GeometryService.verify_assumption1(pair, num_samples=300, seed=3)
        assert report.passed, pair.name
        assert report.max_deviation <= 1e-10


@pytest.mark.parametrize("tau", [0.25, 0.5, 0.75])
def test_tempered_pairs_satisfy_geometry_identity(tau):
    pair = GeometryService.build_pair("tempered", 3, tau=tau, p=2.0)
    assert GeometryService.verify_assumption1(pair, num_samples=200).passed


def test_mismatched_pair_fails_identity():
    """Test that pairing entropy with the exponential map is detected"""
    good = GeometryService.build_pair("logbarrier", 2, 0.05)
    bad = GeometryPair(
        name="mismatched",
        regularizer=NegativeEntropy(),
        reparam=good.reparam,
        primal_domain=good.primal_domain,
        reparam_domain=good.reparam_domain,
    )
    report = GeometryService.verify_assumption1(bad, num_samples=100)
    assert not report.passed
    assert report.max_deviation > 1e-3


def test_domain_map_agrees_with_membership(all_pairs):
    """Test u in K' iff q(u) in K on samples straddling the boundary"""
    for pair in all_pairs:
        assert GeometryService.domain_map_mismatches(pair, num_samples=400, seed=5) == 0, pair.name


def test_verify_rejects_zero_samples(eg_pair):
    with pytest.raises(RejectedInputError):
        GeometryService.verify_assumption1(eg_pair, num_samples=0)


def test_unknown_pair_is_configuration_error():
    with pytest.raises(ConfigurationError):
        GeometryService.build_pair("mirror-of-mirrors")


def test_logbarrier_pair_needs_positive_floor():
    with pytest.raises(ConfigurationError):
        GeometryService.build_pair("logbarrier", 2, 0.0)
