import json

import pytest

from kdvgrav import cache
from kdvgrav import gelfand_dickey as gd
from kdvgrav.diffpoly import parse


def test_round_trip_is_identical(tmp_path):
    table = gd.build_table(5)
    path = tmp_path / cache.GD_FILE
    cache.write_table(path, table)
    first = path.read_bytes()
    back = cache.read_table(path)
    assert back.entries == table.entries and back.max_n == 5
    cache.write_table(path, back)
    assert path.read_bytes() == first


def test_extension_keeps_prior_entries_bit_identical(tmp_path):
    cache.cached_table(tmp_path, 5)
    before = json.loads((tmp_path / cache.GD_FILE).read_text())["entries"]
    gd.clear_caches()
    cache.cached_table(tmp_path, 8)
    after = json.loads((tmp_path / cache.GD_FILE).read_text())["entries"]
    assert after[:6] == before and len(after) == 9
    gd.clear_caches()
    fresh = cache.table_to_json_obj(gd.build_table(8))["entries"]
    assert after == fresh


def test_smaller_request_is_served_from_disk(tmp_path, monkeypatch):
    cache.cached_table(tmp_path, 6)
    monkeypatch.setattr(gd, "build_table", lambda *a, **k: pytest.fail("recomputed"))
    table = cache.cached_table(tmp_path, 3)
    assert table.max_n == 3 and len(table.entries) == 4


def test_no_cache_dir_touches_nothing(tmp_path):
    table = cache.cached_table(None, 3)
    assert table.max_n == 3
    assert not any(tmp_path.iterdir())


@pytest.mark.parametrize(
    "corrupt",
    [
        lambda text: text[: len(text) // 2],
        lambda text: text.replace('"schema": 1', '"schema": 99'),
        lambda text: text.replace('"1/12"', '"1/13"'),
        lambda text: text.replace('"kind": "gd_table"', '"kind": "other"'),
    ],
    ids=["truncated", "schema", "wrong-coefficient", "kind"],
)
def test_corrupt_cache_warns_and_recomputes(tmp_path, corrupt):
    cache.cached_table(tmp_path, 4)
    path = tmp_path / cache.GD_FILE
    good = path.read_text()
    path.write_text(corrupt(good))
    with pytest.warns(cache.CacheWarning):
        table = cache.cached_table(tmp_path, 4)
    assert table.entries == gd.build_table(4).entries
    assert path.read_text() == good


def test_validate_rejects_broken_tables():
    table = gd.build_table(3)
    broken = gd.GDTable(3, table.entries[:2] + [(2, parse("u0^2"), table.T(2))] + table.entries[3:])
    with pytest.raises(ValueError):
        cache.validate_table(broken)
    with pytest.raises(ValueError):
        cache.validate_table(gd.GDTable(0, []))


def test_atomic_write_leaves_no_temp_files(tmp_path):
    cache.write_atomic(tmp_path / "x.json", "{}\n")
    assert [p.name for p in tmp_path.iterdir()] == ["x.json"]


def test_default_dir_follows_environment(isolated_cache):
    assert cache.default_cache_dir() == isolated_cache


def test_pkl_cache_round_trip(tmp_path):
    entry = cache.cached_pkl(tmp_path, 2, 1)
    assert entry.P == gd.compute_T(2)
    cache.cached_pkl(tmp_path, 1, 1)
    obj = json.loads((tmp_path / cache.PKL_FILE).read_text())
    assert [(e["k"], e["l"]) for e in obj["entries"]] == [(1, 1), (2, 1)]
    assert cache.read_pkl(tmp_path / cache.PKL_FILE)[(1, 1)] == parse("1/2*u0^2")


def test_corrupt_pkl_cache_recomputes(tmp_path):
    cache.cached_pkl(tmp_path, 2, 1)
    path = tmp_path / cache.PKL_FILE
    path.write_text(path.read_text().replace('"1/6"', '"1/7"'))
    with pytest.warns(cache.CacheWarning):
        entry = cache.cached_pkl(tmp_path, 2, 1)
    assert entry.P == gd.compute_T(2)
