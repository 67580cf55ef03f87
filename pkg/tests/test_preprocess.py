"""Discard rule and threshold sweep: hand examples and the preservation guarantee."""

import math

import numpy as np
import pytest

from drifttrack.preprocess import (
    ProjectionView,
    discard_redundant,
    project,
    threshold_oracle,
)


def view_of(t, labels):
    t = np.asarray(t, dtype=float)
    return ProjectionView(
        direction=np.array([1.0]),
        t=t,
        labels=np.asarray(labels, dtype=int),
        index=np.arange(t.shape[0]),
    )


class TestThresholdOracle:
    def test_separable_three_points(self):
        sol = threshold_oracle(view_of([1.0, 2.0, 3.0], [1, 1, 0]))
        assert sol.count == 0
        assert sol.intervals == ((2.0, 3.0),)

    def test_inverted_pair(self):
        sol = threshold_oracle(view_of([1.0, 2.0], [0, 1]))
        assert sol.count == 1
        assert sol.intervals == ((-math.inf, 1.0), (2.0, math.inf))

    def test_all_ones(self):
        sol = threshold_oracle(view_of([5.0, 1.0, 3.0], [1, 1, 1]))
        assert sol.count == 0
        assert sol.intervals == ((5.0, math.inf),)

    def test_duplicate_projections(self):
        sol = threshold_oracle(view_of([1.0, 1.0, 2.0], [1, 0, 0]))
        # theta < 1 misclassifies the 1 at t=1; theta in [1,2) misclassifies
        # the 0 there instead; both cost 1, so the regions merge
        assert sol.count == 1
        assert sol.intervals == ((-math.inf, 2.0),)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            threshold_oracle(view_of([], []))

    def brute_force_count(self, t, labels):
        candidates = np.concatenate(([t.min() - 1.0], np.unique(t)))
        best = len(t)
        for theta in candidates:
            predicted = (t <= theta).astype(int)
            best = min(best, int(np.sum(predicted != labels)))
        return best

    def test_matches_position_by_position_enumeration(self, rng):
        for _ in range(150):
            n = int(rng.integers(1, 60))
            t = np.round(rng.normal(size=n), 2)
            labels = rng.integers(0, 2, size=n)
            sol = threshold_oracle(view_of(t, labels))
            assert sol.count == self.brute_force_count(t, labels)


class TestDiscard:
    def test_band_example(self):
        view = view_of([1.0, 2.0, 1.5, 3.0], [1, 1, 0, 0])
        kept, report = discard_redundant(view)
        assert report.theta_lo == 1.5
        assert report.theta_hi == 2.0
        assert sorted(zip(kept.t, kept.labels)) == [(1.5, 0), (2.0, 1)]
        assert report.discarded_label1 == 1
        assert report.discarded_label0 == 1
        before = threshold_oracle(view).count
        after = threshold_oracle(kept).count
        assert before == after == 1

    def test_separable_keeps_two_witnesses(self):
        view = view_of([0.1, 0.4, 2.0, 3.5, 5.0], [1, 1, 0, 0, 0])
        kept, report = discard_redundant(view)
        assert report.kept == 2
        assert sorted(zip(kept.t, kept.labels)) == [(0.4, 1), (2.0, 0)]
        assert threshold_oracle(kept).count == 0

    def test_idempotent(self, rng):
        view = view_of(rng.normal(size=80), rng.integers(0, 2, size=80))
        once, _ = discard_redundant(view)
        twice, report = discard_redundant(once)
        assert report.kept == once.m
        assert np.array_equal(twice.t, once.t)
        assert np.array_equal(twice.index, once.index)

    def test_witnesses_always_kept(self, rng):
        for _ in range(60):
            n = int(rng.integers(2, 80))
            labels = rng.integers(0, 2, size=n)
            if labels.min() == labels.max():
                continue
            t = rng.normal(size=n)
            view = view_of(t, labels)
            kept, _ = discard_redundant(view)
            arg_hi = int(np.argmax(np.where(labels == 1, t, -np.inf)))
            arg_lo = int(np.argmin(np.where(labels == 0, t, np.inf)))
            assert arg_hi in kept.index
            assert arg_lo in kept.index

    def test_objective_preserved_on_random_instances(self, rng):
        for _ in range(200):
            n = int(rng.integers(2, 300))
            center = rng.normal()
            t = center + rng.normal(size=n)
            drift = rng.uniform(-0.5, 0.5)
            noisy_threshold = center + drift + rng.normal(scale=0.2, size=n)
            labels = (t <= noisy_threshold).astype(int)
            view = view_of(t, labels)
            kept, _ = discard_redundant(view)
            assert threshold_oracle(view).count == threshold_oracle(kept).count

    def test_one_class_data_warns_and_keeps_witness(self):
        view = view_of([1.0, 2.0, 3.0], [1, 1, 1])
        with pytest.warns(UserWarning, match="one-class"):
            kept, report = discard_redundant(view)
        assert report.degenerate
        assert kept.m == 1
        assert kept.t[0] == 3.0  # the boundary witness of the present class

    def test_report_json_fields(self):
        view = view_of([1.0, 2.0, 1.5, 3.0], [1, 1, 0, 0])
        _, report = discard_redundant(view)
        data = report.to_json_dict()
        for key in ("kept", "discarded_I1", "discarded_I0", "theta_lo", "theta_hi"):
            assert key in data
        assert data["total_unique"] == 4


class TestProject:
    def test_projection_values(self):
        view = project([[1.0, 2.0], [3.0, 4.0]], [1, 0], [2.0, -1.0])
        assert np.allclose(view.t, [0.0, 2.0])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            project([[1.0, 2.0]], [1], [1.0, 2.0, 3.0])

    def test_label_validation(self):
        with pytest.raises(ValueError):
            view_of([1.0], [2])
