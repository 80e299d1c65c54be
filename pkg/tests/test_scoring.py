import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from classgaze.clustering import ClusteringParams, dbscan
from classgaze.scoring import (
    AlertPolicy,
    AttentionScore,
    evaluate_alert,
    score_window,
    score_window_statistical,
)
from classgaze.stats import RandomizationConfig

from conftest import blob, dist_from_xy


def _cluster(xy, **params):
    return dbscan(dist_from_xy(xy), ClusteringParams(**params))


class TestScoreWindow:
    def test_single_cluster_full_score(self):
        c = _cluster([(0.5, 0.5)] * 150, min_samples=100, eps_mode="fixed", eps=0.05)
        s = score_window(c, 150)
        assert s.value == 1.0
        assert s.clustered_fraction == 1.0
        assert s.concentration == 1.0

    def test_two_equal_clusters_half_score(self, gen):
        xy = np.vstack([blob(gen, 100, (0.1, 0.1), 0.005), blob(gen, 100, (0.9, 0.9), 0.005)])
        c = _cluster(xy, min_samples=50, eps_mode="fixed", eps=0.05)
        assert c.cluster_sizes == (100, 100)
        s = score_window(c, 200)
        assert s.value == pytest.approx(0.5)

    def test_all_noise_scores_zero(self, gen):
        c = _cluster(gen.random((200, 2)), min_samples=100, eps_mode="fixed", eps=0.01)
        s = score_window(c, 200)
        assert s.value == 0.0
        assert s.n_clusters == 0

    def test_empty_window(self):
        s = score_window(None, 0, 1000.0, 2000.0)
        assert s.value == 0.0
        assert s.n_points == 0
        assert s.n_clusters == 0

    def test_density_identity_holds(self, gen):
        xy = np.vstack([blob(gen, 150, (0.4, 0.4), 0.02), gen.random((50, 2))])
        c = _cluster(xy, min_samples=30)
        s = score_window(c, 200)
        assert s.value == pytest.approx(s.clustered_fraction * s.concentration)
        assert 0.0 <= s.value <= 1.0

    def test_partition_permutation_invariance(self, gen):
        xy = np.vstack([blob(gen, 120, (0.3, 0.6), 0.02), gen.random((80, 2))])
        perm = gen.permutation(200)
        params = dict(min_samples=25, eps_mode="fixed", eps=0.04)
        a = score_window(_cluster(xy, **params), 200)
        b = score_window(_cluster(xy[perm], **params), 200)
        assert a.value == b.value

    def test_negative_points_rejected(self):
        with pytest.raises(ValueError):
            score_window(None, -1)


class TestScoreWindowStatistical:
    CFG = RandomizationConfig(trials=400, sample_size=5000, seed=21)

    def test_tight_blob_saturates(self, gen):
        d = dist_from_xy(blob(gen, 5000, (0.5, 0.5), 0.02))
        s = score_window_statistical(d, self.CFG)
        assert s.value >= 0.9
        assert s.strategy == "statistical"

    def test_uniform_window_near_zero(self, gen):
        d = dist_from_xy(gen.random((5000, 2)))
        s = score_window_statistical(d, self.CFG)
        assert s.value <= 0.1

    def test_deterministic(self, gen):
        d = dist_from_xy(blob(gen, 1000, (0.4, 0.4), 0.1))
        cfg = RandomizationConfig(trials=150, sample_size=800, seed=22)
        assert score_window_statistical(d, cfg).value == score_window_statistical(d, cfg).value


def _scores(values):
    return [
        AttentionScore(
            value=v,
            window_start=i * 2000.0,
            window_end=i * 2000.0 + 10000.0,
            n_points=100,
            n_clusters=1,
            clustered_fraction=v,
            concentration=1.0,
        )
        for i, v in enumerate(values)
    ]


class TestEvaluateAlert:
    POLICY = AlertPolicy(threshold=0.5, consecutive_windows=3, cooloff_windows=5)

    def test_single_alert_at_third_low_window(self):
        alerts = evaluate_alert(_scores([0.9, 0.4, 0.4, 0.4, 0.9]), self.POLICY)
        assert len(alerts) == 1
        assert alerts[0].window_index == 3
        assert alerts[0].score == 0.4

    def test_no_alert_when_above_threshold(self):
        assert evaluate_alert(_scores([0.9, 0.8, 0.7, 0.6, 0.51]), self.POLICY) == []

    def test_run_too_short(self):
        assert evaluate_alert(_scores([0.4, 0.4]), self.POLICY) == []

    def test_sustained_dip_alerts_once(self):
        alerts = evaluate_alert(_scores([0.9] + [0.1] * 30), self.POLICY)
        assert len(alerts) == 1

    def test_cooloff_suppresses_rapid_redip(self):
        values = [0.4, 0.4, 0.4, 0.9, 0.4, 0.4, 0.4, 0.9]
        alerts = evaluate_alert(_scores(values), self.POLICY)
        assert [a.window_index for a in alerts] == [2]

    def test_redip_after_cooloff_alerts_again(self):
        values = [0.4, 0.4, 0.4] + [0.9] * 6 + [0.4, 0.4, 0.4]
        alerts = evaluate_alert(_scores(values), self.POLICY)
        assert [a.window_index for a in alerts] == [2, 11]

    def test_threshold_is_strict(self):
        policy = AlertPolicy(threshold=0.5, consecutive_windows=2, cooloff_windows=2)
        assert evaluate_alert(_scores([0.5, 0.5, 0.5]), policy) == []

    @given(
        st.lists(st.floats(min_value=0.0, max_value=1.0, allow_nan=False), max_size=80),
        st.floats(min_value=0.05, max_value=0.95),
        st.integers(min_value=1, max_value=5),
        st.integers(min_value=1, max_value=6),
    )
    @settings(max_examples=120, deadline=None)
    def test_debounce_properties(self, values, threshold, consecutive, cooloff):
        policy = AlertPolicy(
            threshold=threshold, consecutive_windows=consecutive, cooloff_windows=cooloff
        )
        alerts = evaluate_alert(_scores(values), policy)
        indices = [a.window_index for a in alerts]
        # no two alerts within the cooloff of each other
        assert all(b - a > cooloff for a, b in zip(indices, indices[1:]))
        # each alert sits at the end of a long-enough below-threshold run
        for idx in indices:
            run = values[idx - consecutive + 1 : idx + 1]
            assert len(run) == consecutive
            assert all(v < threshold for v in run)


class TestAlertPolicy:
    def test_threshold_bounds(self):
        with pytest.raises(ValueError):
            AlertPolicy(threshold=0.0)
        with pytest.raises(ValueError):
            AlertPolicy(threshold=1.0)
