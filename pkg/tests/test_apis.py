import math

import numpy as np
import pytest

from pe_lab.apis import (
    CopyInit,
    GammaVAlphaContract,
    InterpolateInit,
    PointMassInit,
    SingleScaleGaussianApi,
    UniformInit,
    VariationApiSpec,
    contraction_estimate,
    random_api,
    structural_contract_holds,
    variation_api,
    variation_api_dataset,
)
from pe_lab.geometry import Ball, Box
from pe_lab.hyperparams import gamma_of_d

BALL = Ball(np.zeros(2), 1.0)


def test_level_count_and_variation_count():
    spec = VariationApiSpec(alpha=0.1, domain=BALL)
    assert spec.levels == 5  # ceil(log2(2 / 0.1))
    assert spec.per_point_count == 11


def test_level_scales_formula():
    spec = VariationApiSpec(alpha=0.1, domain=BALL)
    # Frozen from 0.1 / (sqrt(pi) * ((sqrt(2)+ln2)^2 + ln2)).
    assert spec.sigmas[0] == pytest.approx(0.010989029672194641, rel=1e-12)
    ratios = spec.sigmas[1:] / spec.sigmas[:-1]
    np.testing.assert_allclose(ratios, 2.0, rtol=1e-12)


def test_variations_contain_origin_point():
    spec = VariationApiSpec(alpha=0.2, domain=BALL)
    rng = np.random.default_rng(0)
    z = np.array([0.3, -0.4])
    out = variation_api(spec, z, rng)
    assert out.shape == (spec.per_point_count, 2)
    assert np.any(np.all(out == z, axis=1))
    assert BALL.contains_all(out)


def test_variations_rejects_outside_point():
    spec = VariationApiSpec(alpha=0.2, domain=BALL)
    with pytest.raises(ValueError):
        variation_api(spec, np.array([2.0, 0.0]), np.random.default_rng(0))


def test_dataset_variation_count():
    spec = VariationApiSpec(alpha=0.1, domain=BALL)
    rng = np.random.default_rng(1)
    S = BALL.sample_uniform(7, rng)
    out = variation_api_dataset(spec, S, rng)
    assert out.shape == (7 * 11, 2)
    assert BALL.contains_all(out)
    # Input order is preserved: block i starts with S[i].
    for i in range(7):
        np.testing.assert_array_equal(out[i * 11], S[i])


def test_single_point_dataset_matches_point_call():
    spec = VariationApiSpec(alpha=0.3, domain=BALL)
    z = np.array([0.1, 0.2])
    a = variation_api(spec, z, np.random.default_rng(5))
    b = variation_api_dataset(spec, z.reshape(1, 2), np.random.default_rng(5))
    np.testing.assert_array_equal(a, b)


def test_variations_deterministic_golden():
    spec = VariationApiSpec(alpha=0.5, domain=BALL)
    out1 = variation_api(spec, np.zeros(2), np.random.default_rng(2024))
    out2 = variation_api(spec, np.zeros(2), np.random.default_rng(2024))
    np.testing.assert_array_equal(out1, out2)
    # Regenerate the first noise draw from the same stream.
    noise = np.random.default_rng(2024).standard_normal((1, spec.levels, 2, 2))
    expected_first = spec.sigmas[0] * noise[0, 0, 0]
    np.testing.assert_allclose(out1[1], expected_first, atol=1e-15)


def test_random_api_point_mass():
    out = random_api(BALL, 3, PointMassInit(np.zeros(2)), np.random.default_rng(0))
    np.testing.assert_array_equal(out, np.zeros((3, 2)))
    with pytest.raises(ValueError):
        random_api(BALL, 1, PointMassInit(np.array([3.0, 0.0])), np.random.default_rng(0))


def test_random_api_copy():
    data = BALL.sample_uniform(10, np.random.default_rng(3))
    out = random_api(BALL, 99, CopyInit(data), np.random.default_rng(0))
    np.testing.assert_array_equal(out, data)


def test_random_api_interpolate():
    data = BALL.sample_uniform(10, np.random.default_rng(3))
    out = random_api(BALL, 99, InterpolateInit(0.25, data), np.random.default_rng(0))
    np.testing.assert_allclose(out, 0.5 * data, atol=1e-15)
    mid = random_api(BALL, 99, InterpolateInit(0.5, data), np.random.default_rng(0))
    np.testing.assert_allclose(mid, np.zeros_like(data), atol=1e-15)


def test_random_api_uniform_ball_moment():
    # Mean norm of the uniform distribution on the unit disk is 2/3.
    out = random_api(BALL, 10**5, UniformInit(), np.random.default_rng(8))
    assert abs(np.linalg.norm(out, axis=1).mean() - 2 / 3) < 0.01


def test_random_api_uniform_box():
    box = Box(np.zeros(2), np.ones(2))
    out = random_api(box, 1000, UniformInit(), np.random.default_rng(8))
    assert box.contains_all(out)


def test_contraction_zero_distance():
    spec = VariationApiSpec(alpha=0.05, domain=BALL)
    z = np.array([0.2, 0.2])
    mean, stderr = contraction_estimate(spec, z, z, 200, np.random.default_rng(0))
    assert mean == 0.0


def test_contraction_bound_single_pair():
    spec = VariationApiSpec(alpha=0.05, domain=BALL)
    gamma = gamma_of_d(2)
    z1 = np.array([-0.4, 0.0])
    z2 = np.array([0.4, 0.0])
    dist = float(np.linalg.norm(z1 - z2))
    mean, stderr = contraction_estimate(spec, z1, z2, 10**4, np.random.default_rng(1))
    assert mean <= (1 - gamma) * dist + 0.05 + 3 * stderr


def test_contraction_requires_trials():
    spec = VariationApiSpec(alpha=0.05, domain=BALL)
    with pytest.raises(ValueError):
        contraction_estimate(spec, np.zeros(2), np.zeros(2), 10, np.random.default_rng(0))


def test_structural_contract():
    spec = VariationApiSpec(alpha=0.1, domain=BALL)
    contract = GammaVAlphaContract(gamma=gamma_of_d(2), v=spec.per_point_count, alpha=0.1)
    rng = np.random.default_rng(4)
    points = BALL.sample_uniform(10, rng)
    assert structural_contract_holds(spec, contract, points, rng)
    tight = GammaVAlphaContract(gamma=0.5, v=spec.per_point_count - 1, alpha=0.1)
    assert not structural_contract_holds(spec, tight, points, rng)


def test_single_scale_api_contract():
    api = SingleScaleGaussianApi(scale=0.2, copies=4, domain=BALL)
    contract = GammaVAlphaContract(gamma=0.01, v=5, alpha=0.2)
    rng = np.random.default_rng(9)
    points = BALL.sample_uniform(5, rng)
    assert structural_contract_holds(api, contract, points, rng)
    out = api.variations_dataset(points, rng)
    assert out.shape == (25, 2)
    assert BALL.contains_all(out)


def test_contract_validation():
    with pytest.raises(ValueError):
        GammaVAlphaContract(gamma=1.5, v=3, alpha=0.1)
    with pytest.raises(ValueError):
        GammaVAlphaContract(gamma=0.5, v=0, alpha=0.1)
