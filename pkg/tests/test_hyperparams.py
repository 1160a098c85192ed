import math

import numpy as np
import pytest

from pe_lab.hyperparams import (
    ParameterError,
    gamma_of_d,
    gaussian_complexity_bound,
    run_params,
    t_heuristic,
    theorem2_params,
    variation_levels,
)
from pe_lab.privacy import sigma_for_composition


def test_gamma_values():
    # Frozen from a 40-digit evaluation of 1/(8*pi*((sqrt(d)+ln2)^2+ln2)).
    assert gamma_of_d(1) == pytest.approx(0.011176942224427657, rel=1e-12)
    assert gamma_of_d(2) == pytest.approx(0.007749870092936789, rel=1e-12)
    assert gamma_of_d(2) == pytest.approx(0.0077505, abs=1e-5)
    assert gamma_of_d(3) == pytest.approx(0.006051764996040093, rel=1e-12)


def test_gamma_monotone_in_dimension():
    values = [gamma_of_d(d) for d in range(1, 12)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_theorem_params_golden_chain():
    # Entire chain frozen from an independent 40-digit evaluation.
    params = theorem2_params(1000, 1.0, 1e-4, 2, 2.0)
    assert params.t_raw == pytest.approx(-342.51289489860645, rel=1e-12)
    assert params.T == 1
    assert params.sigma == pytest.approx(0.012285590859728574, rel=1e-12)
    assert params.alpha == pytest.approx(0.22168076921310584, rel=1e-12)
    assert params.levels == 4
    assert params.n_s_real == pytest.approx(27.132055522537374, rel=1e-12)
    assert params.n_s == 28


def test_theorem_params_internal_consistency():
    params = theorem2_params(5000, 0.8, 1e-5, 3, 2.0)
    again = sigma_for_composition(params.T, 5000, 0.8, 1e-5)
    assert params.sigma == pytest.approx(again, rel=1e-12)


def test_theorem_params_sigma_monotone_in_n():
    s1 = theorem2_params(1000, 1.0, 1e-4, 2, 2.0).sigma
    s2 = theorem2_params(2000, 1.0, 1e-4, 2, 2.0).sigma
    assert s2 < s1


def test_theorem_params_pure_function():
    a = theorem2_params(750, 0.5, 1e-4, 2, 2.0)
    b = theorem2_params(750, 0.5, 1e-4, 2, 2.0)
    assert a == b


def test_theorem_params_ns_at_least_one():
    rng = np.random.default_rng(19)
    for _ in range(50):
        n = int(rng.integers(500, 200000))
        eps = float(rng.random() * 0.9 + 0.1)
        d = int(rng.integers(1, 8))
        params = theorem2_params(n, eps, 1e-4, d, 2.0)
        assert 0 < params.sigma < 1
        assert params.n_s >= 1


def test_theorem_params_reports_small_budget():
    with pytest.raises(ParameterError) as info:
        theorem2_params(10, 0.1, 1e-4, 2, 2.0)
    assert "n*eps" in str(info.value)


def test_t_heuristic_values():
    assert t_heuristic(1000, 1.0) == 14
    assert t_heuristic(100, 1.0) == 10
    # Doubling n adds at most a couple of steps.
    assert t_heuristic(2000, 1.0) - t_heuristic(1000, 1.0) in (1, 2)
    with pytest.raises(ParameterError):
        t_heuristic(1, 1.0)


def test_variation_levels():
    assert variation_levels(2.0, 0.1) == 5
    assert variation_levels(1.0, 2.0) == 0


def test_gaussian_complexity_golden():
    # Frozen from an independent 40-digit evaluation of each branch.
    assert gaussian_complexity_bound(10000, 2.0, 2) == pytest.approx(
        2.4391412381508283, rel=1e-12
    )
    assert gaussian_complexity_bound(100, 1.0, 1) == pytest.approx(
        1.5577365443420568, rel=1e-12
    )
    assert gaussian_complexity_bound(1000, 2.0, 3) == pytest.approx(
        5.0534574321546852, rel=1e-12
    )


def test_gaussian_complexity_linear_in_D():
    for d in (1, 2, 4):
        one = gaussian_complexity_bound(500, 1.0, d)
        two = gaussian_complexity_bound(500, 2.0, d)
        assert two == pytest.approx(2 * one, rel=1e-12)


def test_gaussian_complexity_decreasing_in_n():
    for d in (1, 2, 3, 5):
        values = [gaussian_complexity_bound(n, 1.0, d) for n in range(3, 2000, 50)]
        assert all(a > b for a, b in zip(values, values[1:]))


def test_run_params_analytic_vs_closed_form():
    analytic = run_params(1000, 1.0, 1e-4, 2, 2.0)
    closed = run_params(1000, 1.0, 1e-4, 2, 2.0, calibration="closed_form")
    assert analytic.T == closed.T == 14
    assert analytic.sigma < closed.sigma
    assert analytic.sigma == pytest.approx(0.016857157377806305, rel=1e-5)
    assert analytic.n_s >= 1 and closed.n_s >= 1


def test_run_params_t_override():
    params = run_params(1000, 1.0, 1e-4, 2, 2.0, T=5)
    assert params.T == 5
    with pytest.raises(ValueError):
        run_params(1000, 1.0, 1e-4, 2, 2.0, calibration="nope")
