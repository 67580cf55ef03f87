"""Monte Carlo validation harness: exact aggregates, determinism, histograms."""

import io
from fractions import Fraction

import numpy as np
import pytest

from drifttrack.bounds import BoundParams
from drifttrack.polytope import Polytope
from drifttrack.validate import (
    histogram,
    monte_carlo_validate,
    write_histogram_csv,
)

BOUNDS = BoundParams(epsilon=0.01, delta=1e-6, vc_dim=1, mu_min=0.0078, mu_max=0.02)
BOX = Polytope(A=[[1, 0], [-1, 0], [0, 1], [0, -1]], b=[-1, 0, -1, 0])


def box_generator(rng, size):
    points = rng.uniform(-0.5, 1.5, size=(size, 2))
    return points, BOX.label_many(points)


def complement_generator(rng, size):
    points, labels = box_generator(rng, size)
    return points, 1 - labels


class TestMonteCarloValidate:
    def test_identical_target_gives_zero(self):
        report = monte_carlo_validate(BOX, box_generator, 20, 300, BOUNDS, seed=1)
        assert report.mean == 0.0
        assert report.max_value == 0.0
        assert report.fraction_exceeding == 0.0

    def test_complement_target_gives_one(self):
        report = monte_carlo_validate(BOX, complement_generator, 20, 300, BOUNDS, seed=1)
        assert report.mean == 1.0
        assert np.all(report.per_run == 1.0)
        assert report.fraction_exceeding == 1.0

    def test_deterministic_per_seed(self):
        a = monte_carlo_validate(BOX, box_generator, 10, 100, BOUNDS, seed=7)
        b = monte_carlo_validate(BOX, box_generator, 10, 100, BOUNDS, seed=7)
        assert np.array_equal(a.counts, b.counts)
        c = monte_carlo_validate(BOX, box_generator, 10, 100, BOUNDS, seed=8)
        assert not np.array_equal(a.counts, c.counts) or a.mean == c.mean == 0.0

    def test_runs_use_indexed_substreams(self):
        """The first k runs of a longer experiment equal a k-run experiment,
        so aggregation order cannot matter."""

        def noisy(rng, size):
            points = rng.uniform(-0.5, 1.5, size=(size, 2))
            labels = BOX.label_many(points)
            flip = rng.random(size) < 0.1
            return points, np.where(flip, 1 - labels, labels)

        long = monte_carlo_validate(BOX, noisy, 12, 200, BOUNDS, seed=3)
        short = monte_carlo_validate(BOX, noisy, 5, 200, BOUNDS, seed=3)
        assert np.array_equal(long.counts[:5], short.counts)

    def test_mean_is_exact_ratio_of_total_counts(self):
        def noisy(rng, size):
            points = rng.uniform(-0.5, 1.5, size=(size, 2))
            labels = BOX.label_many(points)
            flip = rng.random(size) < 0.3
            return points, np.where(flip, 1 - labels, labels)

        report = monte_carlo_validate(BOX, noisy, 15, 123, BOUNDS, seed=5)
        exact = Fraction(int(report.counts.sum()), 15 * 123)
        assert report.mean == float(exact)
        # and the per-run list reproduces the same exact mean
        assert sum(Fraction(int(c), 123) for c in report.counts) / 15 == exact
        assert report.hist_counts.sum() == 15

    def test_bad_sizes(self):
        with pytest.raises(ValueError):
            monte_carlo_validate(BOX, box_generator, 0, 10, BOUNDS)
        with pytest.raises(ValueError):
            monte_carlo_validate(BOX, box_generator, 10, 0, BOUNDS)

    def test_report_json_and_csv(self):
        report = monte_carlo_validate(BOX, box_generator, 5, 50, BOUNDS, seed=2, bins=4)
        data = report.to_json_dict()
        assert data["runs"] == 5
        assert data["bound_value"] == pytest.approx(0.09)
        assert "note" in data
        buf = io.StringIO()
        write_histogram_csv(report, buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "bin_lo,bin_hi,count"
        assert len(lines) == 5


class TestHistogram:
    def test_two_bins(self):
        edges, counts = histogram(np.array([0.0, 0.0, 1.0]), 2, (0.0, 1.0))
        assert np.allclose(edges, [0.0, 0.5, 1.0])
        assert counts.tolist() == [2, 1]

    def test_constant_values_land_in_one_bin(self):
        edges, counts = histogram(np.full(9, 0.4), 5)
        assert counts.sum() == 9
        assert (counts > 0).sum() == 1

    def test_partition_property(self, rng):
        values = rng.uniform(0, 1, size=500)
        _, counts = histogram(values, 30)
        assert counts.sum() == 500

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            histogram(np.array([]), 3)
        with pytest.raises(ValueError):
            histogram(np.array([1.0]), 0)
