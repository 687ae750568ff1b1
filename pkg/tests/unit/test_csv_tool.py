import json
import math

import numpy as np
import pytest

from src.models import GaussianSample, RunManifest
from src.tools.csv_tool import ResultWriter, read_sample, read_table


@pytest.fixture
def writer(tmp_path):
    return ResultWriter(str(tmp_path / "out"), header={"nu": 1.0, "kind": "energy", "N": 3})


class TestFormatting:
    def test_seventeen_digits(self, writer):
        assert writer.format_value(0.1) == "0.10000000000000001"
        assert float(writer.format_value(1 / 3)) == 1 / 3

    def test_special_values(self, writer):
        assert writer.format_value(True) == "true"
        assert writer.format_value(np.bool_(False)) == "false"
        assert writer.format_value(math.nan) == "nan"
        assert writer.format_value(np.int64(4)) == "4"
        assert writer.format_value(None) == ""

    def test_digits_override(self, tmp_path):
        assert ResultWriter(str(tmp_path), digits=6).format_value(math.pi) == "3.14159"


class TestTables:
    def test_header_is_sorted(self, writer):
        path = writer.write_table("energy.csv", ["t", "e_l2"], [[0.0, 1.5]], meta={"dt": 0.25})
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[:4] == ["# N=3", "# dt=0.25", "# kind=energy", "# nu=1"]
        assert lines[4] == "t,e_l2"

    def test_read_back(self, writer):
        path = writer.write_table("table.csv", ["a", "b"], [[1, 0.5], [2, math.nan]])
        table = read_table(str(path))
        assert table["columns"] == ["a", "b"]
        assert table["rows"] == [["1", "0.5"], ["2", "nan"]]
        assert table["meta"]["kind"] == "energy"

    def test_row_width_checked(self, writer):
        with pytest.raises(ValueError):
            writer.write_table("bad.csv", ["a", "b"], [[1]])

    def test_identical_inputs_give_identical_bytes(self, tmp_path):
        rows = [[k, k * 0.1] for k in range(5)]
        first = ResultWriter(str(tmp_path / "a"), header={"seed": 1}).write_table("x.csv", ["k", "v"], rows)
        second = ResultWriter(str(tmp_path / "b"), header={"seed": 1}).write_table("x.csv", ["k", "v"], rows)
        assert first.read_bytes() == second.read_bytes()


class TestSamples:
    def test_sample_round_trip(self, writer):
        sample = GaussianSample.draw(2, 3, master_seed=8, stream=5)
        path = writer.write_sample("sample.csv", sample)
        restored = read_sample(str(path))
        assert np.array_equal(restored.xi, sample.xi)
        assert (restored.seed, restored.stream) == (8, 5)

    def test_incomplete_sample(self, writer):
        path = writer.write_table("partial.csv", ["i", "k", "value"], [[1, 1, 0.5], [2, 2, 0.1]])
        with pytest.raises(ValueError, match="every"):
            read_sample(str(path))


class TestManifest:
    def test_manifest_tracks_files(self, writer):
        manifest = RunManifest(
            config={"kind": "energy"}, code_version="1.0.0", hermite_convention="signed", noise_sign=-1
        )
        writer.attach_manifest(manifest)
        writer.write_table("energy.csv", ["t"], [[0.0]])
        writer.write_manifest()
        saved = json.loads((writer.out_dir / "manifest.json").read_text(encoding="utf-8"))
        assert saved["files"] == ["energy.csv"]
        assert saved["status"] == "running"

    def test_manifest_required(self, writer):
        with pytest.raises(RuntimeError):
            writer.write_manifest()
