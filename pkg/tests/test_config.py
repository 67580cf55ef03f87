"""Configuration schema: round trips, strictness, and the sample-count hook."""

import pytest

from drifttrack.config import RunConfig, dumps_config, load_config, loads_config
from drifttrack.pipeline import planned_sample_count


class TestRoundTrip:
    def test_load_serialize_load_is_identity(self):
        config = RunConfig(seed=17, samples=4000, mu_max=0.03, fit_route="milp")
        assert loads_config(dumps_config(config)) == config

    def test_default_serialization_parses(self):
        assert loads_config(dumps_config(RunConfig())) == RunConfig()

    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "run.cfg"
        config = RunConfig(epsilon=0.02, seed=5)
        path.write_text(dumps_config(config))
        assert load_config(path) == config


class TestStrictness:
    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match="unknown key"):
            loads_config("epsilon = 0.01\nbogus_key = 3\n")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            loads_config("seed = 1\nseed = 2\n")

    def test_type_errors_carry_line_numbers(self):
        with pytest.raises(ValueError, match="line 2"):
            loads_config("seed = 1\nepsilon = banana\n")

    def test_comments_and_blanks_ignored(self):
        config = loads_config("# a comment\n\nseed = 9  # trailing comment\n")
        assert config.seed == 9

    def test_missing_separator(self):
        with pytest.raises(ValueError, match="key = value"):
            loads_config("seed 1\n")

    def test_semantic_validation(self):
        with pytest.raises(ValueError):
            loads_config("mu_max = 0.9\nmu_min = 0.95\n")  # aeb params fine, bound params checked downstream
        with pytest.raises(ValueError):
            loads_config("tie_break = volume\n")
        with pytest.raises(ValueError):
            loads_config("samples = -5\n")


class TestSampleCount:
    def test_auto_uses_the_bound(self):
        assert planned_sample_count(RunConfig()) == 119237

    def test_explicit_override(self):
        assert planned_sample_count(RunConfig(samples=777)) == 777
