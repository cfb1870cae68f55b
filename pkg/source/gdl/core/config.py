'''
Experiment configuration: a JSON file, overridden by command line flags.

Example file::

	{
		"experiment": "facade-acgan",
		"seed": 7,
		"output_dir": "runs/facade",
		"steps": 12000
	}
'''

from __future__ import annotations # remove in Python 3.10

import os
import json
import pathlib
import dataclasses
from typing import Optional, Tuple, Union

from .acgan import GanSpec, GanTrainConfig
from .classifier import TrainConfig
from .daylight import LABEL_NAMES, DEFAULT_FACADE_SEEDS
from .facade import GRID_ROWS, GRID_COLUMNS, PIXELS_PER_CELL
from .shapegen import SHAPE_CLASS_NAMES
from .exc import ConfigurationError
from .logger import gdl_logger as logger

EXPERIMENTS = ("shapes-cnn", "shapes-acgan", "facade-acgan")

@dataclasses.dataclass(frozen=True)
class GanProfile:
	'''
	:param images: size of the stratified training subset; ``None`` uses the whole dataset
	'''
	name: str
	label_names: Tuple[str, ...]
	image_shape: Tuple[int, int]
	images: Optional[int]
	batch_size: int
	steps: int

PROFILES = {
	"shapes": GanProfile("shapes", SHAPE_CLASS_NAMES, (64, 64), 2616, 32, 5000),
	"shapes-ci": GanProfile("shapes-ci", SHAPE_CLASS_NAMES, (32, 32), 800, 32, 600),
	"facade": GanProfile("facade", LABEL_NAMES, (GRID_ROWS * PIXELS_PER_CELL, GRID_COLUMNS * PIXELS_PER_CELL), None, 5, 12000),
}

DEFAULT_PROFILE = {"shapes-cnn": None, "shapes-acgan": "shapes", "facade-acgan": "facade"}

@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
	'''
	Everything a subcommand needs besides its positional inputs.

	Unset hyperparameters (``None``) fall back to the defaults of the module
	configuration objects or of the GAN profile.

	:param seed: master seed; every random stream is derived from it
	:param experiment: one of ``shapes-cnn``, ``shapes-acgan``, ``facade-acgan``
	:param profile: GAN profile name (``shapes``, ``shapes-ci``, ``facade``)
	'''
	seed: int
	experiment: Optional[str] = None
	profile: Optional[str] = None
	output_dir: str = "."
	dataset: Optional[str] = None
	checkpoint: Optional[str] = None
	per_class: int = 1000
	facade_seeds: Tuple[int, ...] = DEFAULT_FACADE_SEEDS
	epochs: Optional[int] = None
	steps: Optional[int] = None
	batch_size: Optional[int] = None
	learning_rate: Optional[float] = None
	validation_split: Optional[float] = None
	snapshot_interval: Optional[int] = None
	label: Optional[str] = None
	n: Optional[int] = None
	tolerance_pct: float = 2.0

	def __post_init__(self):
		if self.seed is None:
			raise ConfigurationError("A master seed is required (--seed or \"seed\" in the config file).")
		if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
			raise ConfigurationError(f"The seed must be a non-negative integer; got {self.seed!r}.")
		if self.experiment is not None and self.experiment not in EXPERIMENTS:
			raise ConfigurationError(f"Unknown experiment '{self.experiment}'; expected one of {EXPERIMENTS}.")
		if self.profile is not None and self.profile not in PROFILES:
			raise ConfigurationError(f"Unknown profile '{self.profile}'; expected one of {tuple(PROFILES)}.")
		if self.per_class < 0 or (self.n is not None and self.n < 0):
			raise ConfigurationError("Counts must be non-negative.")

	@classmethod
	def fromFile(cls, path:Optional[Union[str, os.PathLike]]=None, **overrides) -> ExperimentConfig:
		'''
		Read a JSON file (if given) and apply ``overrides``; ``None`` overrides are ignored.

		:raises ConfigurationError: for unreadable files, unknown keys or a missing seed
		'''
		values = dict()
		if path is not None:
			path = pathlib.Path(path)
			try:
				with open(path) as f:
					values = json.load(f)
			except (OSError, json.JSONDecodeError) as e:
				raise ConfigurationError(f"Could not read the configuration file '{path}': {e}")
			if not isinstance(values, dict):
				raise ConfigurationError(f"'{path}' must contain a JSON object.")
		values.update({k: v for k, v in overrides.items() if v is not None})

		known = {f.name for f in dataclasses.fields(cls)}
		unknown = sorted(set(values) - known)
		if unknown:
			raise ConfigurationError(f"Unknown configuration keys: {', '.join(unknown)}")
		if "facade_seeds" in values:
			values["facade_seeds"] = tuple(values["facade_seeds"])
		values.setdefault("seed", None)
		logger.debug(f"configuration: {values}")
		return cls(**values)

	def count(self, default:int) -> int:
		''' The ``--n`` sample count, or ``default`` when unset. '''
		return default if self.n is None else self.n

	@property
	def outputPath(self) -> pathlib.Path:
		return pathlib.Path(self.output_dir)

	def ganProfile(self, default:str="shapes") -> GanProfile:
		name = self.profile or DEFAULT_PROFILE.get(self.experiment) or default
		return PROFILES[name]

	def trainConfig(self) -> TrainConfig:
		''' Classifier training settings with unset fields left at their defaults. '''
		fields = dict(epochs=self.epochs, batch_size=self.batch_size, learning_rate=self.learning_rate,
		              validation_split=self.validation_split)
		try:
			return TrainConfig(seed=self.seed, **{k: v for k, v in fields.items() if v is not None})
		except ValueError as e:
			raise ConfigurationError(str(e))

	def ganSpec(self, profile:Optional[GanProfile]=None) -> GanSpec:
		profile = profile or self.ganProfile()
		return GanSpec(label_names=profile.label_names, image_shape=profile.image_shape)

	def ganTrainConfig(self, profile:Optional[GanProfile]=None) -> GanTrainConfig:
		profile = profile or self.ganProfile()
		fields = dict(learning_rate=self.learning_rate, snapshot_interval=self.snapshot_interval)
		try:
			return GanTrainConfig(steps=profile.steps if self.steps is None else self.steps,
			                      batch_size=profile.batch_size if self.batch_size is None else self.batch_size,
			                      seed=self.seed, **{k: v for k, v in fields.items() if v is not None})
		except ValueError as e:
			raise ConfigurationError(str(e))
