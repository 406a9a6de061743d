import math

import numpy as np
import pytest

from mzphase import (
    IDEAL,
    DegeneratePosteriorError,
    InfiniteVarianceError,
    NoiseChannel,
    PosteriorGrid,
    UndefinedMeanError,
    make_generator,
    noisy_likelihood,
    wrap_phase,
)

from _oracles import wrapped_normal_weights

TWO_PI = 2 * math.pi


def delta_grid(location, grid_size=256):
    phis = np.arange(grid_size) * (TWO_PI / grid_size)
    weights = np.zeros(grid_size)
    weights[int(np.argmin(np.abs(phis - location)))] = 1.0
    return PosteriorGrid(weights)


def test_uniform_prior_small():
    grid = PosteriorGrid.uniform(4)
    assert np.allclose(grid.weights, 0.25)


def test_uniform_prior_truncated_support():
    grid = PosteriorGrid.uniform(8, support=(0.0, math.pi))
    nonzero = grid.weights[grid.weights > 0]
    assert nonzero.size == 5  # points 0, pi/4, pi/2, 3pi/4, pi
    assert np.allclose(nonzero, 0.2)
    assert np.all(grid.weights[5:] == 0.0)


def test_uniform_prior_default_grid():
    grid = PosteriorGrid.uniform(2 ** 17)
    assert np.allclose(grid.weights, 2.0 ** -17)


def test_uniform_prior_rejects_bad_input():
    with pytest.raises(ValueError):
        PosteriorGrid.uniform(1)
    with pytest.raises(ValueError):
        PosteriorGrid.uniform(8, support=(2.0, 1.0))
    with pytest.raises(ValueError):
        PosteriorGrid.uniform(4, support=(0.2, 0.3))  # no grid point inside


def test_single_update_cos2_posterior_statistics():
    # posterior after outcome 0 at feedback 0 from a flat prior is
    # cos^2(phi/2)/pi, whose sharpness is exactly 1/2
    grid = PosteriorGrid.uniform(2 ** 12).update(0, 0.0)
    assert abs(grid.sharpness() - 0.5) < 1e-12
    assert abs(grid.holevo_variance() - 3.0) < 1e-10
    mu, sigma = grid.gaussian_summary()
    assert mu == pytest.approx(0.0, abs=1e-9) or mu == pytest.approx(TWO_PI, abs=1e-9)
    assert sigma == pytest.approx(math.sqrt(3.0), abs=1e-9)


def test_update_degenerate_posterior_raises():
    grid = delta_grid(1.0)
    location = float(grid.phis[np.argmax(grid.weights)])
    with pytest.raises(DegeneratePosteriorError):
        grid.update(1, location)  # sin^2(0) = 0 at the only support point


def test_two_updates_opposite_outcomes_closed_form():
    grid_size = 512
    grid = PosteriorGrid.uniform(grid_size)
    grid.update(0, 1.0).update(1, 1.0)
    phis = grid.phis
    expected = (np.cos((phis - 1.0) / 2) * np.sin((phis - 1.0) / 2)) ** 2
    expected /= expected.sum()
    assert np.max(np.abs(grid.weights - expected)) < 1e-10


def test_update_order_invariance():
    rng = make_generator(10)
    for _ in range(20):
        fb1, fb2 = rng.uniform(0, TWO_PI, 2)
        x1, x2 = int(rng.integers(2)), int(rng.integers(2))
        a = PosteriorGrid.uniform(128).update(x1, fb1).update(x2, fb2)
        b = PosteriorGrid.uniform(128).update(x2, fb2).update(x1, fb1)
        assert np.max(np.abs(a.weights - b.weights)) < 1e-12


@pytest.mark.parametrize("grid_size", [16, 64])
def test_brute_force_product_oracle(grid_size):
    rng = make_generator(11)
    channel = NoiseChannel.depolarizing(0.2)
    updates = [(int(rng.integers(2)), float(rng.uniform(0, TWO_PI))) for _ in range(5)]
    grid = PosteriorGrid.uniform(grid_size)
    for x, fb in updates:
        grid.update(x, fb, channel)
    # direct normalized product of prior and likelihoods
    phis = np.arange(grid_size) * (TWO_PI / grid_size)
    direct = np.full(grid_size, 1.0 / grid_size)
    for x, fb in updates:
        direct = direct * noisy_likelihood(channel, x, phis, fb)
    direct /= direct.sum()
    assert np.max(np.abs(grid.weights - direct)) < 1e-14


def test_normalization_after_many_updates():
    rng = make_generator(12)
    grid = PosteriorGrid.uniform(1024)
    for _ in range(1000):
        # resample to a fresh prior occasionally so weights stay nondegenerate
        if grid.sharpness() > 0.999999:
            grid = PosteriorGrid.uniform(1024)
        grid.update(int(rng.integers(2)), float(rng.uniform(0, TWO_PI)))
        assert abs(grid.weights.sum() - 1.0) < 1e-10
        assert np.all(grid.weights >= 0.0)


def test_shift_equivariance():
    shift = 0.7137
    rng = make_generator(13)
    updates = [(int(rng.integers(2)), float(rng.uniform(0, TWO_PI))) for _ in range(6)]
    a = PosteriorGrid.uniform(4096)
    b = PosteriorGrid.uniform(4096)
    for x, fb in updates:
        a.update(x, fb)
        b.update(x, fb + shift)
    expected = wrap_phase(a.circular_mean() + shift)
    got = b.circular_mean()
    delta = abs(math.remainder(got - expected, TWO_PI))
    # grid spacing limits how exactly an off-grid shift can be represented
    assert delta < 1e-2
    assert abs(a.sharpness() - b.sharpness()) < 1e-3


def test_shift_equivariance_exact_on_grid_multiple():
    grid_size = 4096
    shift = 16 * TWO_PI / grid_size  # exact multiple of grid spacing
    rng = make_generator(14)
    updates = [(int(rng.integers(2)), float(rng.uniform(0, TWO_PI))) for _ in range(6)]
    a = PosteriorGrid.uniform(grid_size)
    b = PosteriorGrid.uniform(grid_size)
    for x, fb in updates:
        a.update(x, fb)
        b.update(x, fb + shift)
    delta = math.remainder(b.circular_mean() - a.circular_mean() - shift, TWO_PI)
    assert abs(delta) < 1e-10
    assert abs(a.sharpness() - b.sharpness()) < 1e-10


def test_circular_mean_point_mass_and_two_points():
    grid = delta_grid(1.3, 4096)
    assert grid.circular_mean() == pytest.approx(1.3, abs=1e-3)
    assert grid.sharpness() == pytest.approx(1.0)
    assert grid.holevo_variance() == pytest.approx(0.0, abs=1e-12)

    grid_size = 8
    weights = np.zeros(grid_size)
    weights[0] = 0.5  # phi = 0
    weights[2] = 0.5  # phi = pi/2
    two = PosteriorGrid(weights)
    assert two.circular_mean() == pytest.approx(math.pi / 4)


def test_uniform_grid_has_no_mean_and_infinite_variance():
    grid = PosteriorGrid.uniform(2 ** 14)
    assert grid.sharpness() < 1e-12
    with pytest.raises(UndefinedMeanError):
        grid.circular_mean()
    with pytest.raises(InfiniteVarianceError):
        grid.holevo_variance()
    with pytest.raises(UndefinedMeanError):
        grid.gaussian_summary()


def test_gaussian_summary_recovers_narrow_wrapped_normal():
    grid_size = 2 ** 14
    phis = np.arange(grid_size) * (TWO_PI / grid_size)
    weights = wrapped_normal_weights(phis, 2.0, 0.05)
    mu, sig = PosteriorGrid(weights).gaussian_summary()
    assert mu == pytest.approx(2.0, abs=1e-6)
    assert sig == pytest.approx(0.05, rel=0.01)
    # wider densities match the exact circular width sqrt(e^{sigma^2} - 1)
    weights = wrapped_normal_weights(phis, 2.0, 0.2)
    _, sig = PosteriorGrid(weights).gaussian_summary()
    assert sig == pytest.approx(math.sqrt(math.exp(0.04) - 1.0), rel=1e-6)


def test_gaussian_summary_of_cos2_posterior():
    grid = PosteriorGrid.uniform(2 ** 12).update(0, 0.0)
    mu, sigma = grid.gaussian_summary()
    assert min(mu, TWO_PI - mu) == pytest.approx(0.0, abs=1e-9)
    assert sigma == pytest.approx(math.sqrt(3.0), abs=1e-9)


def test_sample_from_delta_and_frequencies():
    rng = make_generator(15)
    grid = delta_grid(0.7, 1024)
    loc = float(grid.phis[np.argmax(grid.weights)])
    assert all(grid.sample(rng) == loc for _ in range(20))

    # two-point distribution 0.9 / 0.1
    weights = np.zeros(64)
    weights[0], weights[32] = 0.9, 0.1
    two = PosteriorGrid(weights)
    draws = np.array([two.sample(rng) for _ in range(10 ** 5)])
    assert abs(np.mean(draws == 0.0) - 0.9) < 0.01
    assert abs(np.mean(draws == two.phis[32]) - 0.1) < 0.01

    # balanced two-point distribution over {0, pi}
    weights = np.zeros(64)
    weights[0], weights[32] = 0.5, 0.5
    balanced = PosteriorGrid(weights)
    draws = np.array([balanced.sample(rng) for _ in range(10 ** 5)])
    assert abs(np.mean(draws == 0.0) - 0.5) < 0.01


def test_sample_respects_truncated_support():
    rng = make_generator(16)
    grid = PosteriorGrid.uniform(64, support=(0.0, math.pi))
    draws = [grid.sample(rng) for _ in range(500)]
    assert all(0.0 <= d <= math.pi for d in draws)


def test_truncated_support_stays_zero_after_updates():
    grid = PosteriorGrid.uniform(256, support=(0.0, math.pi))
    outside = grid.weights == 0.0
    for fb in (0.3, 1.1, 2.0):
        grid.update(0, fb)
        assert np.all(grid.weights[outside] == 0.0)


def test_dump_csv(tmp_path):
    grid = PosteriorGrid.uniform(8)
    path = tmp_path / "posterior.csv"
    grid.dump_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "phi,weight"
    assert len(lines) == 9
    phi0, w0 = lines[1].split(",")
    assert float(phi0) == 0.0
    assert float(w0) == 0.125
