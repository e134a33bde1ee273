"""Tests for raster, census and report export."""
import io
import json

import numpy as np
import pytest

from src import __version__
from src.core.config import RunConfig
from src.core.exceptions import GeometryError
from src.utils.exporter import RunExporter
from src.wave.field_sampler import FieldRaster, GridSpec, eval_raster
from src.wave.nodal_counter import NodalCensus


@pytest.fixture
def exporter(tmp_path):
    return RunExporter(str(tmp_path), RunConfig(command="sample", master_seed=7))


@pytest.fixture
def raster(random_coeffs):
    return eval_raster(random_coeffs, GridSpec(h=0.25, half_extent=2.0, center=(0.5, -1.0)))


def test_header(exporter):
    header = exporter.header()
    assert header["type"] == "header"
    assert header["version"] == __version__
    assert header["config"]["master_seed"] == 7
    assert header["config"]["center"] == [0.0, 0.0]


def test_binary_raster_round_trip(exporter, raster, tmp_path):
    files = exporter.export_raster(raster, str(tmp_path / "out" / "field.bin"))
    assert files == [str(tmp_path / "out" / "field.bin"), str(tmp_path / "out" / "field.json")]
    assert (tmp_path / "out" / "field.bin").stat().st_size == raster.values.size * 4

    sidecar = json.loads((tmp_path / "out" / "field.json").read_text())
    assert sidecar["rows"] == sidecar["cols"] == 17
    assert sidecar["center"] == [0.5, -1.0]
    assert sidecar["seed"] == raster.seed
    assert sidecar["version"] == __version__

    restored = RunExporter.read_raster(files[0])
    np.testing.assert_allclose(restored.values, raster.values, rtol=1e-6, atol=1e-6)
    assert restored.h == raster.h
    assert restored.center == (0.5, -1.0)
    assert restored.seed == raster.seed
    assert restored.n_trunc == raster.n_trunc


def test_csv_raster_round_trip(exporter, raster, tmp_path):
    files = exporter.export_raster(raster, str(tmp_path / "field.csv"), fmt="csv")
    lines = (tmp_path / "field.csv").read_text().splitlines()
    assert lines[0] == "x,y,value"
    assert len(lines) == 1 + 17 * 17
    x, y, _ = (float(v) for v in lines[1].split(","))
    assert x == pytest.approx(0.5 - 2.0)
    assert y == pytest.approx(-1.0 - 2.0)

    restored = RunExporter.read_raster(files[0])
    np.testing.assert_array_equal(restored.values, raster.values)


def test_default_raster_path(exporter, raster, tmp_path):
    files = exporter.export_raster(raster)
    assert files[0].startswith(str(tmp_path))
    assert files[0].endswith(".bin")


def test_csv_export_is_limited_to_small_rasters(exporter, tmp_path):
    big = FieldRaster(values=np.zeros((501, 501)), h=0.1, half_extent=25.0)
    with pytest.raises(GeometryError):
        exporter.export_raster(big, str(tmp_path / "big.csv"), fmt="csv")


def test_unknown_raster_format(exporter, raster, tmp_path):
    with pytest.raises(ValueError):
        exporter.export_raster(raster, str(tmp_path / "field.png"), fmt="png")


def test_incomplete_sidecar(exporter, raster, tmp_path):
    files = exporter.export_raster(raster, str(tmp_path / "field.bin"))
    (tmp_path / "field.json").write_text(json.dumps({"h": 0.25}))
    with pytest.raises(GeometryError):
        RunExporter.read_raster(files[0])


def test_census_stream_survives_a_truncated_line(exporter, tmp_path):
    path = str(tmp_path / "count.ndjson")
    first = NodalCensus(n_inside=3, n_touching=9, component_sizes=(4, 5, 6), R=3.0, h=0.1, seed=11)
    second = NodalCensus(n_inside=1, n_touching=8, component_sizes=(40,), R=3.0, h=0.1, seed=12)
    with exporter.open_stream(path) as stream:
        exporter.write_line(stream, exporter.header())
        exporter.write_census(stream, 0, first)
        exporter.write_census(stream, 1, second)
        stream.write('{"type": "census", "index": 2, "n_ins')

    header, censuses = RunExporter.read_censuses(path)
    assert header["config"]["master_seed"] == 7
    assert censuses == {0: first, 1: second}


def test_missing_census_file(tmp_path):
    assert RunExporter.read_censuses(str(tmp_path / "absent.ndjson")) == (None, {})


def test_document_carries_version_and_config(exporter):
    stream = io.StringIO()
    exporter.write_document(stream, {"evaluation": {"nu_lb": 1.4e-4}})
    document = json.loads(stream.getvalue())
    assert document["version"] == __version__
    assert document["config"]["command"] == "sample"
    assert document["evaluation"]["nu_lb"] == 1.4e-4


def test_csv_rows_keep_full_precision():
    stream = io.StringIO()
    RunExporter.write_csv(stream, ("name", "value"), [("a", 0.1 + 0.2), ("b", 3)])
    assert stream.getvalue().splitlines() == ["name,value", "a,0.30000000000000004", "b,3"]
