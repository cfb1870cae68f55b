
import pytest
import pathlib

import numpy as np

from gdl.core import SdaCache
from gdl.core.facade import SkySchedule
from gdl.core.shapegen import synth_dataset

@pytest.fixture
def temporary_cache(tmp_path):
	temporary_cache = SdaCache(path=tmp_path / "gdl_test_cache")
	return temporary_cache

@pytest.fixture
def isolated_default_cache(tmp_path, monkeypatch):
	''' Point the default cache at a temporary directory. '''
	monkeypatch.setenv("GDL_CACHE_DIR", str(tmp_path / "default_cache"))
	monkeypatch.setattr(SdaCache, "_default_instance", None)
	return tmp_path / "default_cache"

@pytest.fixture(scope="session")
def small_shapes():
	''' Ten images per class at the default 100 × 100 size. '''
	return synth_dataset(10, seed=3)

@pytest.fixture(scope="session")
def short_schedule():
	''' Four days × three hours; enough for sDA tests that do not need the full year. '''
	return SkySchedule(days=(80, 172, 264, 355), hours=(9, 12, 15))
