import numpy as np
import pytest

from pe_lab.geometry import Ball
from pe_lab.measures import (
    DiscreteMeasure,
    empirical,
    load_dataset_csv,
    nn_histogram,
    sample_with_replacement,
    save_dataset_csv,
)


def test_empirical_single_point():
    mu = empirical([[0.0, 0.0]])
    np.testing.assert_array_equal(mu.weights, [1.0])
    assert mu.is_probability


def test_empirical_keeps_duplicates():
    a, b = [0.0, 0.0], [1.0, 0.0]
    mu = empirical([a, a, b])
    assert mu.size == 3
    np.testing.assert_allclose(mu.weights, [1 / 3, 1 / 3, 1 / 3])


def test_empirical_four_distinct():
    mu = empirical(np.arange(8.0).reshape(4, 2))
    np.testing.assert_allclose(mu.weights, [0.25] * 4)


def test_empirical_empty_rejected():
    with pytest.raises(ValueError):
        empirical(np.empty((0, 2)))


def test_nn_histogram_exact_match():
    hist = nn_histogram([[0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]])
    np.testing.assert_array_equal(hist, [1.0, 0.0])


def test_nn_histogram_tie_smallest_index():
    # Equidistant candidates: the vote goes to the first one.
    hist = nn_histogram([[0.5, 0.0]], [[0.0, 0.0], [1.0, 0.0]])
    np.testing.assert_array_equal(hist, [1.0, 0.0])


def test_nn_histogram_counts():
    S = [[0.1, 0.0], [0.9, 0.0], [0.8, 0.0]]
    V = [[0.0, 0.0], [1.0, 0.0]]
    np.testing.assert_allclose(nn_histogram(S, V), [1 / 3, 2 / 3])


def test_nn_histogram_simplex_exact():
    rng = np.random.default_rng(0)
    S = rng.normal(size=(87, 3))
    V = rng.normal(size=(23, 3))
    hist = nn_histogram(S, V)
    assert abs(hist.sum() - 1.0) <= 1e-12
    assert np.all(hist >= 0)
    # Entries are exact multiples of 1/|S|.
    np.testing.assert_array_equal(hist * 87, np.round(hist * 87))


def test_nn_histogram_permutation_equivariance():
    rng = np.random.default_rng(4)
    S = rng.normal(size=(40, 2))
    V = rng.normal(size=(11, 2))
    perm = rng.permutation(11)
    hist = nn_histogram(S, V)
    hist_p = nn_histogram(S, V[perm])
    np.testing.assert_array_equal(hist_p, hist[perm])


def test_nn_histogram_self_match():
    rng = np.random.default_rng(8)
    S = rng.normal(size=(15, 2))
    extra = rng.normal(size=(5, 2)) + 10.0
    V = np.concatenate([S, extra])
    hist = nn_histogram(S, V)
    np.testing.assert_allclose(hist[:15], np.full(15, 1 / 15))
    np.testing.assert_array_equal(hist[15:], np.zeros(5))


def test_sampling_point_mass():
    mu = DiscreteMeasure([[2.0, 3.0]], [1.0])
    out = sample_with_replacement(mu, 5, np.random.default_rng(0))
    np.testing.assert_array_equal(out, np.tile([2.0, 3.0], (5, 1)))


def test_sampling_frequencies():
    mu = DiscreteMeasure([[0.0], [1.0]], [0.5, 0.5])
    out = sample_with_replacement(mu, 10**5, np.random.default_rng(123))
    freq = float(np.mean(out[:, 0] == 0.0))
    # Binomial standard error is about 0.0016 at this sample size.
    assert abs(freq - 0.5) < 0.01


def test_sampling_zero_weight_never_drawn():
    mu = DiscreteMeasure([[0.0], [1.0]], [1.0, 0.0])
    out = sample_with_replacement(mu, 2000, np.random.default_rng(7))
    assert np.all(out[:, 0] == 0.0)


def test_sampling_requires_probability():
    mu = DiscreteMeasure([[0.0], [1.0]], [0.9, -0.3])
    with pytest.raises(ValueError):
        sample_with_replacement(mu, 3, np.random.default_rng(0))


def test_sampling_deterministic():
    mu = DiscreteMeasure(np.arange(10.0).reshape(5, 2), np.full(5, 0.2))
    a = sample_with_replacement(mu, 50, np.random.default_rng(42))
    b = sample_with_replacement(mu, 50, np.random.default_rng(42))
    np.testing.assert_array_equal(a, b)


def test_measure_validation():
    with pytest.raises(ValueError):
        DiscreteMeasure([[0.0, 0.0]], [np.inf])
    with pytest.raises(ValueError):
        DiscreteMeasure([[0.0, 0.0]], [0.5, 0.5])
    mu = DiscreteMeasure([[0.0, 1.0]], [1.0 + 5e-10])
    assert mu.is_probability
    assert not DiscreteMeasure([[0.0, 1.0]], [0.9]).is_probability


def test_collapse_duplicates_preserves_measure():
    mu = DiscreteMeasure(
        [[0.0, 0.0], [1.0, 0.0], [0.0, 0.0], [1.0, 0.0], [2.0, 0.0]],
        [0.1, 0.2, 0.3, 0.1, 0.3],
    )
    collapsed = mu.collapse_duplicates()
    assert collapsed.size == 3
    lookup = {tuple(p): w for p, w in zip(collapsed.support, collapsed.weights)}
    assert lookup[(0.0, 0.0)] == pytest.approx(0.4, abs=1e-15)
    assert lookup[(1.0, 0.0)] == pytest.approx(0.3, abs=1e-15)
    assert collapsed.total_mass == pytest.approx(mu.total_mass, abs=1e-12)
    distinct = DiscreteMeasure([[0.0], [1.0]], [0.5, 0.5])
    assert distinct.collapse_duplicates() is distinct


def test_csv_round_trip(tmp_path):
    pts = np.array([[0.25, -0.5], [0.125, 0.75], [1.0, 0.0]])
    path = tmp_path / "data.csv"
    save_dataset_csv(path, pts)
    loaded = load_dataset_csv(path)
    np.testing.assert_array_equal(loaded, pts)


def test_csv_no_header(tmp_path):
    path = tmp_path / "plain.csv"
    path.write_text("0.5,0.5\n-0.25,0.0\n")
    loaded = load_dataset_csv(path)
    assert loaded.shape == (2, 2)


def test_csv_domain_validation(tmp_path):
    path = tmp_path / "out.csv"
    path.write_text("x0,x1\n3.0,0.0\n0.1,0.1\n")
    ball = Ball(np.zeros(2), 1.0)
    with pytest.raises(ValueError):
        load_dataset_csv(path, domain=ball)
    projected = load_dataset_csv(path, domain=ball, project_outliers=True)
    assert ball.contains_all(projected)
    np.testing.assert_allclose(projected[0], [1.0, 0.0], atol=1e-12)


def test_csv_rejects_bad_rows(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x0,x1\n1.0,2.0\n1.0\n")
    with pytest.raises(ValueError):
        load_dataset_csv(path)
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ValueError):
        load_dataset_csv(empty)
