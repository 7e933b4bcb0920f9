"""
Tests for rebuilding a regularizer from its reparameterization
"""

import numpy as np
import pytest

from errors import ConfigurationError, RejectedInputError
from models.scalar_map import ScalarMap
from services.reconstruct_service import ReconstructService


K_HALF = 2.0 / (2.0 - 0.5)


def quarter_square(lower=0.2, upper=2.0, constant=0.0):
    return ReconstructService.scalar_map("quarter-square", lower, upper, constant)


# ============================================================================
# DIFFEOMORPHISM CHECK
# ============================================================================

def test_quarter_square_is_diffeomorphism_away_from_zero():
    report = ReconstructService.check_diffeomorphism(ReconstructService.scalar_map("quarter-square", 0.1, 2.0))
    assert report.passed
    assert report.sign == 1
    assert report.min_abs_derivative == pytest.approx(0.05)


def test_exponential_is_diffeomorphism():
    report = ReconstructService.check_diffeomorphism(ReconstructService.scalar_map("exponential", -2.0, 0.0))
    assert report.passed
    assert report.min_abs_derivative == pytest.approx(0.135335, abs=1e-6)


def test_sign_change_is_not_a_diffeomorphism():
    """Test q' = u/2 changing sign on [-1, 1] is reported with sign 0"""
    report = ReconstructService.check_diffeomorphism(ReconstructService.scalar_map("quarter-square", -1.0, 1.0))
    assert report.sign == 0
    assert not report.passed


def test_check_needs_two_samples():
    with pytest.raises(RejectedInputError):
        ReconstructService.check_diffeomorphism(quarter_square(), samples=1)


def test_empty_interval_is_rejected():
    with pytest.raises(RejectedInputError):
        ReconstructService.scalar_map("exponential", 1.0, 1.0)


# ============================================================================
# LINK RECONSTRUCTION
# ============================================================================

def test_quarter_square_link_closed_form():
    """Test R~'(u) = u ln(u / C) for q = u^2/4 started at C with c = 0"""
    scalar_map = quarter_square()
    link = ReconstructService.reconstruct_link(scalar_map)
    assert link.grid[0] == pytest.approx(0.2)
    assert link.grid[-1] == pytest.approx(2.0)
    assert link.max_spacing <= 1e-3 + 1e-15
    u = np.array([0.2, 0.5, 1.0, 1.7])
    np.testing.assert_allclose(link(u), u * np.log(u / 0.2), atol=1e-8)
    np.testing.assert_allclose(link.derivative(u), np.log(u / 0.2) + 1.0, atol=1e-6)


def test_link_satisfies_ode():
    scalar_map = quarter_square()
    link = ReconstructService.reconstruct_link(scalar_map)
    u = np.linspace(0.25, 1.95, 50)
    assert np.max(ReconstructService.ode_residual(scalar_map, link, u)) < 1e-6


def test_constant_shifts_link_but_not_hessian():
    """Test the free constant c moves R~' but leaves the Hessian alone"""
    base = quarter_square()
    shifted = base.with_constant(3.0)
    link_a = ReconstructService.reconstruct_link(base, h_max=1e-2)
    link_b = ReconstructService.reconstruct_link(shifted, h_max=1e-2)
    u = np.linspace(0.3, 1.9, 20)
    np.testing.assert_allclose(link_b(u) - link_a(u), 3.0 * u / 2.0, atol=1e-8)
    np.testing.assert_allclose(
        ReconstructService.link_hessian(base, link_a, u),
        ReconstructService.link_hessian(shifted, link_b, u),
        rtol=1e-5,
    )


def test_steep_start_is_refined():
    """Test extra knots are packed near C when q'(C) is small"""
    link = ReconstructService.reconstruct_link(quarter_square(lower=0.01, upper=1.0), h_max=1e-2)
    assert link.grid[1] - link.grid[0] < 1e-3
    assert np.all(np.diff(link.grid) > 0)


def test_pchip_rule_shares_knot_values():
    scalar_map = quarter_square()
    hermite = ReconstructService.reconstruct_link(scalar_map, h_max=1e-2)
    pchip = ReconstructService.reconstruct_link(scalar_map, h_max=1e-2, rule="pchip")
    assert pchip.rule == "pchip"
    np.testing.assert_array_equal(pchip.values, hermite.values)
    np.testing.assert_allclose(pchip(pchip.grid), hermite.values, atol=1e-14)


def test_reconstruct_rejects_bad_arguments():
    with pytest.raises(RejectedInputError):
        ReconstructService.reconstruct_link(quarter_square(), h_max=0.0)
    with pytest.raises(ConfigurationError):
        ReconstructService.reconstruct_link(quarter_square(), rule="linear")


def test_reconstruct_refuses_non_diffeomorphism():
    with pytest.raises(ConfigurationError):
        ReconstructService.reconstruct_link(ReconstructService.scalar_map("quarter-square", -1.0, 1.0))


def test_ode_residual_outside_grid_is_rejected():
    scalar_map = quarter_square()
    link = ReconstructService.reconstruct_link(scalar_map, h_max=1e-2)
    with pytest.raises(RejectedInputError):
        ReconstructService.ode_residual(scalar_map, link, 2.5)


def test_corrupted_link_fails_ode():
    """Test the u^2 negative control leaves residual u^2 / 2 for the quarter-square map"""
    scalar_map = quarter_square()
    link = ReconstructService.corrupt_link(ReconstructService.reconstruct_link(scalar_map))
    assert ReconstructService.ode_residual(scalar_map, link, 1.0) == pytest.approx(0.5, abs=1e-6)


# ============================================================================
# HESSIAN
# ============================================================================

def test_reconstructed_hessian_known_values():
    assert ReconstructService.reconstructed_hessian(quarter_square(), 0.25) == pytest.approx(4.0)
    exponential = ReconstructService.scalar_map("exponential", -3.0, 0.0)
    assert ReconstructService.reconstructed_hessian(exponential, 0.5) == pytest.approx(4.0)
    identity = ReconstructService.scalar_map("identity", 0.0, 1.0)
    np.testing.assert_allclose(ReconstructService.reconstructed_hessian(identity, [0.1, 0.7]), [1.0, 1.0])


def test_reconstructed_hessian_without_inverse():
    """Test the root-finding fallback for a map with no closed-form inverse"""
    cubic = ScalarMap(
        name="cubic",
        forward=lambda u: np.asarray(u) ** 3 / 3.0 + np.asarray(u),
        derivative=lambda u: np.asarray(u) ** 2 + 1.0,
        second_derivative=lambda u: 2.0 * np.asarray(u),
        lower=0.0,
        upper=1.0,
    )
    x = 0.5 ** 3 / 3.0 + 0.5
    assert ReconstructService.reconstructed_hessian(cubic, x) == pytest.approx(0.64, abs=1e-9)


def test_reconstructed_hessian_outside_image():
    with pytest.raises(RejectedInputError):
        ReconstructService.reconstructed_hessian(quarter_square(), 1.5)


# ============================================================================
# CERTIFICATES
# ============================================================================

@pytest.mark.parametrize("kind, lower, upper, known, tau", [
    ("quarter-square", 0.2, 2.0, "negative-entropy", None),
    ("exponential", float(np.log(0.1)), 0.0, "log-barrier", None),
    ("power", K_HALF * 0.01 ** (1.0 / K_HALF), K_HALF, "tempered", 0.5),
])
def test_certificates_recover_known_regularizers(kind, lower, upper, known, tau):
    scalar_map = ReconstructService.scalar_map(kind, lower, upper, tau=tau)
    report, link = ReconstructService.certify_reconstruction(scalar_map, known=known, tau=tau)
    assert report.passed
    assert report.max_ode_residual <= 1e-6
    assert report.max_hessian_mismatch <= 1e-8
    assert report.strong_convexity_floor == pytest.approx(1.0, rel=1e-9)
    assert report.knots == link.grid.size


def test_certificate_rejects_wrong_regularizer():
    report, _ = ReconstructService.certify_reconstruction(quarter_square(), known="log-barrier")
    assert not report.passed
    assert report.max_hessian_mismatch > 1e-3


def test_certificate_without_reference():
    report, _ = ReconstructService.certify_reconstruction(quarter_square(), h_max=1e-3)
    assert report.max_hessian_mismatch is None
    assert report.max_link_hessian_mismatch < 1e-4
    assert report.passed


@pytest.mark.parametrize("kind, lower, upper, tau", [
    ("quarter-square", 0.2, 2.0, None),
    ("exponential", float(np.log(0.1)), 0.0, None),
    ("power", K_HALF * 0.01 ** (1.0 / K_HALF), K_HALF, 0.5),
])
def test_ode_residual_does_not_depend_on_constant(kind, lower, upper, tau, rng):
    """Test every choice of the free constant c gives an equally good solution"""
    base = ReconstructService.scalar_map(kind, lower, upper, tau=tau)
    u = rng.uniform(lower, upper, 200)
    reference = ReconstructService.ode_residual(base, ReconstructService.reconstruct_link(base), u)
    assert np.max(reference) < 1e-6
    for c in (-5.0, 3.0, 10.0):
        shifted = base.with_constant(c)
        residual = ReconstructService.ode_residual(shifted, ReconstructService.reconstruct_link(shifted), u)
        assert np.max(residual) < 1e-6
        np.testing.assert_allclose(residual, reference, atol=1e-6)
