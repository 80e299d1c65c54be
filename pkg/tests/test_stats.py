import numpy as np
import pytest

from classgaze.errors import DegenerateNullError, EmptyDistributionError
from classgaze.metrics import GazeDistribution
from classgaze.stats import (
    RandomizationConfig,
    null_distribution,
    random_focus_diff,
    randomization_test,
)

from conftest import blob, dist_from_xy

# smaller than production scale to keep the unit suite quick; the
# acceptance module runs the full 5000x5000 configuration
FAST = dict(trials=400, sample_size=2000)


class TestRandomFocusDiff:
    def test_point_mass_diff_near_uniform_cohesiveness(self):
        d = dist_from_xy([(0.42, 0.58)] * 5000)
        diff = random_focus_diff(d, RandomizationConfig(seed=5, sample_size=5000))
        assert diff == pytest.approx(1.0 / 6.0, abs=0.01)

    def test_uniform_window_diff_near_zero(self, gen):
        d = dist_from_xy(gen.random((5000, 2)))
        diff = random_focus_diff(d, RandomizationConfig(seed=6, sample_size=5000))
        assert abs(diff) <= 0.01

    def test_reference_sample_overrides_generator(self, gen):
        d = dist_from_xy([(0.5, 0.5)] * 100)
        ref = dist_from_xy(gen.random((1000, 2)))
        from classgaze.metrics import cohesiveness

        diff = random_focus_diff(d, RandomizationConfig(seed=1), reference=ref)
        assert diff == cohesiveness(ref)  # d's cohesiveness is exactly 0

    def test_empty_rejected(self):
        with pytest.raises(EmptyDistributionError):
            random_focus_diff(GazeDistribution((), 0, 1), RandomizationConfig(seed=1))


class TestNullDistribution:
    def test_deterministic_under_seed(self):
        cfg = RandomizationConfig(trials=150, sample_size=500, seed=99)
        a = null_distribution(cfg)
        b = null_distribution(cfg)
        assert np.array_equal(a, b)

    def test_different_seeds_differ(self):
        a = null_distribution(RandomizationConfig(trials=150, sample_size=500, seed=1))
        b = null_distribution(RandomizationConfig(trials=150, sample_size=500, seed=2))
        assert not np.array_equal(a, b)

    def test_symmetric_around_zero(self):
        diffs = null_distribution(RandomizationConfig(seed=3, **FAST))
        std = diffs.std()
        assert abs(diffs.mean()) <= 3 * std / np.sqrt(len(diffs))

    def test_mass_concentrated_near_zero(self):
        # |diff| frequency must peak in the lowest bins and decay outward
        diffs = np.abs(null_distribution(RandomizationConfig(seed=4, **FAST)))
        counts, _ = np.histogram(diffs, bins=8, range=(0, float(diffs.max())))
        assert counts[0] == counts.max()
        assert counts[0] > counts[-1]

    def test_warns_below_useful_trials(self):
        with pytest.warns(UserWarning):
            RandomizationConfig(trials=50, sample_size=100, seed=1)


class TestRandomizationTest:
    def test_tight_blob_rejects_hard(self, gen):
        d = dist_from_xy(blob(gen, 5000, (0.5, 0.5), 0.02))
        result = randomization_test(d, RandomizationConfig(trials=400, sample_size=5000, seed=7))
        assert result.p < 1e-6
        assert result.reject_null
        assert result.empirical_tail == 0.0

    def test_uniform_window_calibrated_under_null(self):
        cfg = RandomizationConfig(seed=8, **FAST)
        null = null_distribution(cfg)
        rejects = 0
        repeats = 20
        for i in range(repeats):
            g = np.random.Generator(np.random.Philox(1234 + i))
            d = dist_from_xy(g.random((cfg.sample_size, 2)))
            result = randomization_test(d, cfg, null_diffs=null)
            rejects += int(result.reject_null)
        assert rejects <= 0.10 * repeats + 1

    def test_monotone_z_as_blob_tightens(self):
        cfg = RandomizationConfig(seed=9, **FAST)
        null = null_distribution(cfg)
        zs = []
        for sigma in (0.2, 0.1, 0.05, 0.02):
            g = np.random.Generator(np.random.Philox(42))
            d = dist_from_xy(blob(g, 2000, (0.5, 0.5), sigma))
            zs.append(randomization_test(d, cfg, null_diffs=null).z)
        assert zs == sorted(zs)

    def test_degenerate_null_raises(self):
        d = dist_from_xy([(0.5, 0.5)] * 10)
        with pytest.raises(DegenerateNullError):
            randomization_test(
                d, RandomizationConfig(trials=100, sample_size=10, seed=1), null_diffs=np.zeros(100)
            )

    def test_reject_flag_follows_alpha(self, gen):
        cfg = RandomizationConfig(seed=10, **FAST)
        d = dist_from_xy(gen.random((2000, 2)))
        result = randomization_test(d, cfg)
        assert result.reject_null == (result.p < cfg.alpha)

    def test_result_is_pure_function_of_inputs(self, gen):
        cfg = RandomizationConfig(seed=11, trials=120, sample_size=600)
        d = dist_from_xy(blob(gen, 600, (0.3, 0.4), 0.05))
        r1 = randomization_test(d, cfg)
        r2 = randomization_test(d, cfg)
        assert r1.z == r2.z
        assert r1.p == r2.p
        assert np.array_equal(r1.null_diffs, r2.null_diffs)
