"""Tests for artifact writers."""

import numpy as np
import orjson

from cumret.hashutil import hash_file
from cumret.report import (
    dumps_json,
    dumps_json_line,
    format_metadata,
    render_csv,
    write_csv,
    write_json,
    write_rows,
)


class TestJson:
    """Tests for JSON serialization."""

    def test_sorted_and_terminated(self):
        """Keys are sorted and output ends with LF."""
        data = dumps_json({"b": 1, "a": 2})
        assert data.endswith(b"\n")
        assert data.index(b'"a"') < data.index(b'"b"')

    def test_numpy_values(self):
        """numpy scalars and arrays serialize as plain JSON."""
        line = dumps_json_line({"x": np.float64(0.5), "n": np.int64(3), "v": np.array([1.0, 2.0])})
        assert orjson.loads(line) == {"n": 3, "v": [1.0, 2.0], "x": 0.5}

    def test_tuples_become_lists(self):
        """Tuples serialize as arrays."""
        assert orjson.loads(dumps_json_line({"w": (1, 2)})) == {"w": [1, 2]}

    def test_metadata_envelope(self, tmp_path):
        """Metadata wraps the payload."""
        path = tmp_path / "out.json"
        digest = write_json(path, {"R": 1.0}, {"seed": 42})
        payload = orjson.loads(path.read_bytes())
        assert payload == {"metadata": {"seed": 42}, "data": {"R": 1.0}}
        assert len(digest) == 64


class TestCsv:
    """Tests for CSV rendering."""

    def test_metadata_line(self):
        """Metadata is a sorted key=value comment line."""
        assert format_metadata({"seed": 42, "k": 0.003, "M": 1000}) == "# M=1000,k=0.003,seed=42"

    def test_render_with_fieldnames(self):
        """Columns follow the given order with LF endings."""
        text = render_csv([{"b": 2, "a": 1}], ["b", "a"], {"seed": 1})
        assert text == "# seed=1\nb,a\n2,1\n"

    def test_digest_matches_file(self, tmp_path):
        """The returned digest is the SHA-256 of the bytes on disk."""
        path = tmp_path / "rows.csv"
        digest = write_csv(path, [{"rule": "SMA", "k": 0.001}], ["rule", "k"], {"seed": 42})
        assert digest == hash_file(path)
        assert path.read_text(encoding="utf-8").splitlines()[2] == "SMA,0.001"

    def test_same_rows_same_bytes(self, tmp_path):
        """Output is byte-stable."""
        rows = [{"n": i, "R": 1.0 + i / 10} for i in range(5)]
        first = write_csv(tmp_path / "a.csv", rows, ["n", "R"], {"seed": 42})
        second = write_csv(tmp_path / "b.csv", rows, ["n", "R"], {"seed": 42})
        assert first == second


class TestWriteRows:
    """Tests for write_rows."""

    def test_csv_format(self, tmp_path):
        """CSV goes to <stem>.csv."""
        path = write_rows(tmp_path, "fig", [{"n": 1, "R": 0.5}], ["n", "R"], {"seed": 42})
        assert path.name == "fig.csv"
        assert path.read_text(encoding="utf-8").splitlines()[1] == "n,R"

    def test_json_format(self, tmp_path):
        """JSON keeps only the named columns."""
        path = write_rows(
            tmp_path, "fig", [{"n": 1, "R": 0.5, "extra": True}], ["n", "R"], {"seed": 42}, "json"
        )
        assert path.name == "fig.json"
        assert orjson.loads(path.read_bytes())["data"] == [{"n": 1, "R": 0.5}]
