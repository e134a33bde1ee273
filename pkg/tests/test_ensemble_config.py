"""Tests for the ensemble runner and configuration validation."""
from functools import partial

import pytest

from src.core import config
from src.core.config import RunConfig, validate_config
from src.core.ensemble import EnsembleRunner
from src.core.exceptions import ConfigurationError
from src.wave.field_sampler import derive_seed


def _square(i, *, offset=0):
    return i * i + offset


def _seeds(indices, *, master_seed):
    return [derive_seed(master_seed, i) for i in indices]


def test_runner_keeps_index_order():
    runner = EnsembleRunner(n_jobs=2, backend="threading")
    assert runner.map(partial(_square, offset=1), [5, 0, 3, 9]) == [26, 1, 10, 82]


def test_parallel_results_match_serial_results():
    indices = range(23)
    worker = partial(_seeds, master_seed=99)
    serial = EnsembleRunner(n_jobs=1).map_chunks(worker, indices, chunk_size=5)
    threaded = EnsembleRunner(n_jobs=3, backend="threading").map_chunks(worker, indices, chunk_size=5)
    assert serial == threaded == [derive_seed(99, i) for i in indices]


def test_runner_handles_empty_input():
    runner = EnsembleRunner(n_jobs=2, backend="threading")
    assert runner.map(_square, []) == []
    assert runner.map_chunks(partial(_seeds, master_seed=1), [], chunk_size=4) == []


def test_runner_rejects_zero_jobs():
    with pytest.raises(ValueError):
        EnsembleRunner(n_jobs=0)


def test_default_configuration_is_valid():
    assert validate_config()
    assert validate_config(RunConfig(command="bound"))


@pytest.mark.parametrize("changes", [
    {"threads": 0},
    {"h": 0.0},
    {"eps": 1.0},
    {"n_samples": 0},
    {"n_trunc": 0},
    {"R": -1.0},
    {"count_samples": 0},
    {"resume": True},
    {"resume": True, "output": "c.csv", "format": "csv"},
    {"lemma2_samples": 0},
    {"lemma2_triggering": -1},
    {"format": "xml"},
])
def test_invalid_run_configuration(changes):
    run_config = RunConfig(command="count", **changes)
    with pytest.raises(ConfigurationError):
        validate_config(run_config)


def test_invalid_environment(monkeypatch):
    monkeypatch.setattr(config, "TRUNCATION_EPS", 2.0)
    with pytest.raises(ConfigurationError, match="TRUNCATION_EPS"):
        validate_config()


def test_negative_count_margin(monkeypatch):
    monkeypatch.setattr(config, "COUNT_MARGIN", -1.0)
    with pytest.raises(ConfigurationError, match="COUNT_MARGIN"):
        validate_config()


def test_csv_resume_names_the_conflict():
    run_config = RunConfig(command="count", resume=True, output="c.csv", format="csv")
    with pytest.raises(ConfigurationError, match="--format csv"):
        validate_config(run_config)


def test_run_config_serialises_center_as_list():
    data = RunConfig(command="sample", center=(1.0, -2.0)).to_dict()
    assert data["center"] == [1.0, -2.0]
    assert data["x0_list"] == [0.0, 1.0, 2.0]
