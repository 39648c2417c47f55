"""Tests for run identifier generation."""

from concurrent.futures import ThreadPoolExecutor

import ulid

from cumret.ids import new_run_id


class TestRunIds:
    """Test ULID run identifiers."""

    def test_new_run_id_returns_ulid_string(self):
        """Run ids are 26-character ULIDs."""
        run_id = new_run_id()
        assert isinstance(run_id, str)
        assert len(run_id) == 26
        assert str(ulid.parse(run_id)) == run_id

    def test_rapid_generation_is_ordered_and_unique(self):
        """Monotonic ids sort in creation order."""
        ids = [new_run_id() for _ in range(200)]
        assert ids == sorted(ids)
        assert len(set(ids)) == 200

    def test_thread_safety(self):
        """Concurrent generation yields unique ids."""
        with ThreadPoolExecutor(max_workers=8) as pool:
            ids = list(pool.map(lambda _: new_run_id(), range(400)))
        assert len(set(ids)) == 400

