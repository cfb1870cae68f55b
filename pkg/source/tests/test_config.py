
import json

import pytest

from gdl.core.config import ExperimentConfig, PROFILES
from gdl.core.daylight import LABEL_NAMES
from gdl.core.shapegen import SHAPE_CLASS_NAMES
from gdl.core.exc import ConfigurationError

def write_config(tmp_path, values):
	path = tmp_path / "config.json"
	path.write_text(json.dumps(values))
	return path

def test_file_and_overrides(tmp_path):
	path = write_config(tmp_path, {"experiment": "facade-acgan", "seed": 7, "steps": 100, "facade_seeds": [0, 1]})
	cfg = ExperimentConfig.fromFile(path, steps=50, batch_size=None)
	assert cfg.seed == 7
	assert cfg.steps == 50
	assert cfg.facade_seeds == (0, 1)
	assert cfg.ganProfile().name == "facade"

def test_seed_is_required(tmp_path):
	with pytest.raises(ConfigurationError):
		ExperimentConfig.fromFile()
	with pytest.raises(ConfigurationError):
		ExperimentConfig.fromFile(write_config(tmp_path, {"steps": 10}))

@pytest.mark.parametrize("values", [{"seed": 1, "epoch": 3}, {"seed": -1}, {"seed": True}, {"seed": 1, "experiment": "mnist"},
                                    {"seed": 1, "profile": "huge"}, {"seed": 1, "n": -2}])
def test_invalid_values(tmp_path, values):
	with pytest.raises(ConfigurationError):
		ExperimentConfig.fromFile(write_config(tmp_path, values))

def test_unreadable_file(tmp_path):
	with pytest.raises(ConfigurationError):
		ExperimentConfig.fromFile(tmp_path / "missing.json")
	bad = tmp_path / "bad.json"
	bad.write_text("[1, 2")
	with pytest.raises(ConfigurationError):
		ExperimentConfig.fromFile(bad)
	array = tmp_path / "array.json"
	array.write_text("[1, 2]")
	with pytest.raises(ConfigurationError):
		ExperimentConfig.fromFile(array)

def test_profiles():
	assert PROFILES["shapes"].image_shape == (64, 64) and PROFILES["shapes"].images == 2616
	assert PROFILES["shapes-ci"].image_shape == (32, 32) and PROFILES["shapes-ci"].steps == 600
	facade = PROFILES["facade"]
	assert facade.image_shape == (32, 72)
	assert facade.label_names == LABEL_NAMES
	assert (facade.batch_size, facade.steps, facade.images) == (5, 12000, None)

def test_profile_selection():
	assert ExperimentConfig(seed=1).ganProfile().name == "shapes"
	assert ExperimentConfig(seed=1, experiment="shapes-acgan", profile="shapes-ci").ganProfile().name == "shapes-ci"
	spec = ExperimentConfig(seed=1, experiment="facade-acgan").ganSpec()
	assert spec.image_shape == (32, 72)
	assert ExperimentConfig(seed=1).ganSpec().label_names == SHAPE_CLASS_NAMES

def test_gan_train_config_defaults_to_profile():
	cfg = ExperimentConfig(seed=3, profile="shapes-ci")
	train = cfg.ganTrainConfig()
	assert (train.steps, train.batch_size, train.seed) == (600, 32, 3)
	assert ExperimentConfig(seed=3, profile="shapes-ci", steps=10, batch_size=4).ganTrainConfig().steps == 10

def test_train_config():
	train = ExperimentConfig(seed=4, epochs=2).trainConfig()
	assert (train.epochs, train.batch_size, train.seed) == (2, 20, 4)
	with pytest.raises(ConfigurationError):
		ExperimentConfig(seed=4, epochs=0).trainConfig()
	with pytest.raises(ConfigurationError):
		ExperimentConfig(seed=4, steps=0).ganTrainConfig()

def test_count():
	assert ExperimentConfig(seed=0).count(16) == 16
	assert ExperimentConfig(seed=0, n=3).count(16) == 3
	assert ExperimentConfig(seed=0, n=0).count(16) == 0
