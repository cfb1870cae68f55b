
import pytest

from gdl.core import SdaCache

def test_store_and_fetch(temporary_cache):
	'''
	The cache behaves like a key/value store of JSON values.
	'''
	key = SdaCache.key("room", "schedule", "Model", "01" * 72)
	assert key not in temporary_cache
	with pytest.raises(KeyError):
		temporary_cache[key]

	temporary_cache[key] = {"sda": 42.5, "da": [0.0, 0.5, 1.0]}
	assert key in temporary_cache
	assert temporary_cache[key] == {"sda": 42.5, "da": [0.0, 0.5, 1.0]}
	assert len(temporary_cache) == 1

	temporary_cache[key] = {"sda": 10.0, "da": []}
	assert temporary_cache[key]["sda"] == 10.0
	assert len(temporary_cache) == 1

def test_clear(temporary_cache):
	temporary_cache["a"] = {"sda": 1.0}
	temporary_cache["b"] = {"sda": 2.0}
	temporary_cache.clear()
	assert len(temporary_cache) == 0

def test_database_recreated_after_deletion(temporary_cache):
	temporary_cache["a"] = {"sda": 1.0}
	temporary_cache.dbFilepath.unlink()
	assert "a" not in temporary_cache
	temporary_cache["a"] = {"sda": 3.0}
	assert temporary_cache["a"] == {"sda": 3.0}

def test_default_cache_location(isolated_default_cache):
	cache = SdaCache.defaultCache()
	assert cache is SdaCache.defaultCache()
	assert cache.path == isolated_default_cache
	assert cache.dbFilepath.exists()

def test_two_handles_share_results(tmp_path):
	first = SdaCache(path=tmp_path)
	second = SdaCache(path=tmp_path)
	first["key"] = {"sda": 55.0}
	assert second["key"] == {"sda": 55.0}
