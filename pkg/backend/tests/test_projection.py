"""Tests for the consistency projections."""

from __future__ import annotations

import numpy as np
import pytest

from engine.errors import DimensionError
from engine.projection import ProjectionMode, pcoeff, project_consistent, resid
from engine.quantizer import PassthroughQuantizer, build_sign_quantizer, build_uniform_quantizer


def _instance(rng, quantizer, m: int = 30, t: int = 4):
    phi_t = rng.normal(size=(m, t))
    y = quantizer.quantize(phi_t @ rng.normal(size=t) + 0.3 * rng.normal(size=m))
    return phi_t, y


def test_literal_mode_is_plain_least_squares(rng, two_bit_quantizer) -> None:
    phi_t, y = _instance(rng, two_bit_quantizer)

    result = project_consistent(phi_t, y, two_bit_quantizer, ProjectionMode.LITERAL)

    expected, *_ = np.linalg.lstsq(phi_t, y, rcond=None)
    assert np.allclose(result.coefficients, expected, atol=1e-10)
    assert np.array_equal(result.consistent_point, y)
    assert result.iterations == 1


@pytest.mark.property
@pytest.mark.parametrize("bit_depth", [1, 2, 3])
def test_joint_mode_stays_in_the_box_and_never_increases(rng, bit_depth: int) -> None:
    quantizer = build_uniform_quantizer(bit_depth)
    for _ in range(5):
        phi_t, y = _instance(rng, quantizer)

        result = project_consistent(phi_t, y, quantizer, ProjectionMode.JOINT)

        index = quantizer.level_indices(y)
        bounds = np.asarray(quantizer.thresholds)
        assert np.all(result.consistent_point >= bounds[index])
        assert np.all(result.consistent_point <= bounds[index + 1])
        assert all(b <= a + 1e-12 for a, b in zip(result.objective_trace, result.objective_trace[1:]))
        assert result.objective_trace[-1] <= result.objective_trace[0] + 1e-12
        assert 1 <= result.iterations <= 50


@pytest.mark.parametrize("mode", list(ProjectionMode))
def test_residual_is_orthogonal_to_the_columns(rng, two_bit_quantizer, mode) -> None:
    phi_t, y = _instance(rng, two_bit_quantizer)

    r = resid(y, phi_t, two_bit_quantizer, mode)

    assert np.allclose(phi_t.T @ r, 0.0, atol=1e-9)
    assert np.allclose(
        r,
        project_consistent(phi_t, y, two_bit_quantizer, mode).consistent_point - phi_t @ pcoeff(y, phi_t, two_bit_quantizer, mode),
        atol=1e-12,
    )


def test_joint_mode_reduces_to_least_squares_without_quantization(rng) -> None:
    quantizer = PassthroughQuantizer()
    phi_t = rng.normal(size=(12, 3))
    y = rng.normal(size=12)

    joint = project_consistent(phi_t, y, quantizer, ProjectionMode.JOINT)
    literal = project_consistent(phi_t, y, quantizer, ProjectionMode.LITERAL)

    assert np.array_equal(joint.coefficients, literal.coefficients)
    assert joint.iterations == 1


def test_dimension_mismatch_is_rejected(two_bit_quantizer) -> None:
    with pytest.raises(DimensionError):
        project_consistent(np.ones((4, 2)), np.full(5, 0.75), two_bit_quantizer)


def test_unknown_mode_is_rejected(rng, two_bit_quantizer) -> None:
    phi_t, y = _instance(rng, two_bit_quantizer)
    with pytest.raises(ValueError):
        project_consistent(phi_t, y, two_bit_quantizer, "diagonal")


def test_joint_mode_solves_the_two_by_one_instance_by_hand() -> None:
    phi_t = np.array([[1.0], [1.0]])
    y = np.array([1.0, -1.0])

    result = project_consistent(phi_t, y, build_sign_quantizer(), ProjectionMode.JOINT)

    assert np.allclose(result.coefficients, [0.0])
    assert np.allclose(result.consistent_point, [0.0, 0.0])
    assert result.objective_trace[-1] == pytest.approx(0.0, abs=1e-12)
    assert np.linalg.norm(result.residual) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.property
def test_joint_residual_never_exceeds_the_literal_one(rng, two_bit_quantizer) -> None:
    for _ in range(50):
        phi_t, y = _instance(rng, two_bit_quantizer, m=20, t=3)

        joint = resid(y, phi_t, two_bit_quantizer, ProjectionMode.JOINT)
        literal = resid(y, phi_t, two_bit_quantizer, ProjectionMode.LITERAL)

        assert np.linalg.norm(joint) <= np.linalg.norm(literal) + 1e-12


@pytest.mark.parametrize("mode", list(ProjectionMode))
def test_exactly_consistent_instance_returns_the_generating_coefficients(rng, two_bit_quantizer, mode) -> None:
    x = rng.normal(size=3)
    y = two_bit_quantizer.quantize(rng.normal(scale=2.0, size=15))
    phi_t = rng.normal(size=(15, 3))
    # rank-one correction so that phi_t @ x lands exactly on the levels
    phi_t += np.outer(y - phi_t @ x, x) / (x @ x)

    assert np.allclose(pcoeff(y, phi_t, two_bit_quantizer, mode), x, atol=1e-6)
    assert np.linalg.norm(resid(y, phi_t, two_bit_quantizer, mode)) <= 1e-8


def _box_distance(phi_t, y, quantizer, coefficients) -> np.ndarray:
    """||clip(Phi_T x) - Phi_T x|| for each row of ``coefficients``."""

    images = np.atleast_2d(coefficients) @ phi_t.T
    index = quantizer.level_indices(y)
    bounds = np.asarray(quantizer.thresholds)
    clipped = np.clip(images, bounds[index], bounds[index + 1])
    return np.linalg.norm(clipped - images, axis=1)


@pytest.mark.property
def test_joint_coefficients_match_a_grid_search(rng, two_bit_quantizer) -> None:
    phi_t = rng.normal(size=(8, 2))
    # mostly inner levels, whose bounded regions keep the minimizer finite
    y = two_bit_quantizer.quantize(rng.normal(scale=0.5, size=8))

    coefficients = pcoeff(y, phi_t, two_bit_quantizer, ProjectionMode.JOINT, max_iter=5000, tol=1e-14)

    center, half_width = np.zeros(2), 10.0
    for _ in range(30):
        axis = np.linspace(-half_width, half_width, 81)
        grid = center + np.stack(np.meshgrid(axis, axis), axis=-1).reshape(-1, 2)
        values = _box_distance(phi_t, y, two_bit_quantizer, grid)
        center = grid[np.argmin(values)]
        half_width /= 2.0
    best = float(_box_distance(phi_t, y, two_bit_quantizer, center)[0])

    achieved = float(_box_distance(phi_t, y, two_bit_quantizer, coefficients)[0])
    assert achieved == pytest.approx(best, abs=1e-3)
