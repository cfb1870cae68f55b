'''
Spatial daylight autonomy, sDA(300 lx, 50 %), of facade patterns, the A–E
performance labels, the nested run sequences and the labeled facade dataset.
'''

from __future__ import annotations # remove in Python 3.10

import enum
import dataclasses
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import astropy.units as u
from astropy.table import Table
from tqdm import tqdm

from .facade import (RoomModel, FacadePattern, SkySchedule, SunPosition, DEFAULT_ROOM, CELL_COUNT,
                     DIRECT_NORMAL_ILLUMINANCE, DIFFUSE_VERTICAL_ILLUMINANCE, _to_value)
from .illuminance import IlluminanceModel
from .cache import SdaCache
from .dataset import LabeledDataset
from .exc import OutOfRangeError, ScheduleError, EmptyDataset
from .logger import gdl_logger as logger

ILLUMINANCE_THRESHOLD = 300.0 # lux
TIME_FRACTION_THRESHOLD = 0.5
RUNS_PER_SEED = CELL_COUNT - 1
DEFAULT_FACADE_SEEDS = (0, 1, 2, 3)

class PerformanceLabel(enum.Enum):
	''' sDA buckets: A [0, 20), B [20, 40), C [40, 60), D [60, 80), E [80, 100]. '''
	A = "A"
	B = "B"
	C = "C"
	D = "D"
	E = "E"

	@property
	def index(self) -> int:
		return "ABCDE".index(self.value)

	@property
	def bounds(self) -> Tuple[float, float]:
		return 20.0 * self.index, 20.0 * (self.index + 1)

LABEL_NAMES = tuple(label.value for label in PerformanceLabel)

# WWR and sDA ranges (percent) per label of the published reference patterns
REFERENCE_WWR_RANGES = {"A": (0.5, 11.0), "B": (9.0, 21.5), "C": (17.5, 30.5), "D": (29.0, 40.5), "E": (38.5, 71.5)}
REFERENCE_SDA_RANGES = {"A": (0.0, 20.0), "B": (20.0, 40.0), "C": (40.0, 60.0), "D": (60.0, 80.0), "E": (80.0, 100.0)}

def label_of(sda:float) -> PerformanceLabel:
	'''
	The performance label of an sDA percentage; buckets are half-open except E, which is closed at 100.

	:raises OutOfRangeError: if ``sda`` is outside [0, 100]
	'''
	sda = float(sda)
	if not 0.0 <= sda <= 100.0:
		raise OutOfRangeError(f"sDA must lie in [0, 100]; got {sda}.")
	return list(PerformanceLabel)[min(int(sda // 20), 4)]

@dataclasses.dataclass
class SdaResult:
	'''
	:param da: per-sensor daylight autonomy (fraction of timesteps with E ≥ 300 lx)
	:param sda: percentage of sensors with DA ≥ 0.5
	'''
	da: np.ndarray
	sda: float

	@property
	def label(self) -> PerformanceLabel:
		return label_of(self.sda)

def run_sequence(seed:int) -> List[FacadePattern]:
	'''
	The 143 nested patterns of one seed: a seeded permutation of the 144 cells,
	where pattern ``k`` opens the first ``k + 1`` cells.
	'''
	order = np.random.default_rng(seed).permutation(CELL_COUNT)
	return [FacadePattern.fromOpenCells(order[:k + 1]) for k in range(RUNS_PER_SEED)]

def sensor_illuminance(room:RoomModel, pattern:FacadePattern, sensor_index:int, sun:SunPosition,
                       dni=DIRECT_NORMAL_ILLUMINANCE, edv=DIFFUSE_VERTICAL_ILLUMINANCE,
                       model:Optional[IlluminanceModel]=None) -> u.Quantity:
	'''
	Direct plus sky-diffuse illuminance at one sensor for one sun position.

	:param sensor_index: row-major index into the sensor grid
	:param dni: direct-normal illuminance (lux or quantity)
	:param edv: diffuse vertical facade illuminance (lux or quantity)
	:returns: illuminance in lux
	'''
	if not 0 <= sensor_index < room.sensorCount:
		raise OutOfRangeError(f"Sensor index {sensor_index} is outside 0..{room.sensorCount - 1}.")
	model = model or IlluminanceModel.default_model()
	direct, diffuse = model.pointIlluminance(room, pattern, sensor_index, sun, _to_value(dni, u.lx), _to_value(edv, u.lx))
	return (direct + diffuse) * u.lx

def _sda_from_illuminance(illuminance:np.ndarray) -> SdaResult:
	da = np.mean(illuminance >= ILLUMINANCE_THRESHOLD, axis=0)
	sda = 100.0 * float(np.mean(da >= TIME_FRACTION_THRESHOLD))
	return SdaResult(da=da, sda=sda)

def compute_sda(room:RoomModel, pattern:FacadePattern, schedule:SkySchedule,
                model:Optional[IlluminanceModel]=None, cache:Optional[SdaCache]=None) -> SdaResult:
	'''
	sDA(300 lx, 50 %) of a pattern over the occupied timesteps of ``schedule``.

	:param cache: optional result store; results are identical with or without it
	:raises ScheduleError: for an empty schedule
	'''
	if schedule is None or len(schedule) == 0:
		raise ScheduleError("sDA needs at least one occupied timestep.")
	model = model or IlluminanceModel.default_model()
	key = None
	if cache is not None:
		key = SdaCache.key(room.digest(), schedule.digest(), model.name, pattern.bits())
		try:
			stored = cache[key]
			return SdaResult(da=np.array(stored["da"]), sda=stored["sda"])
		except KeyError:
			pass
	result = _sda_from_illuminance(model.illuminance(room, pattern, schedule))
	if cache is not None:
		cache[key] = {"da": result.da.tolist(), "sda": result.sda}
	return result

def synth_facade_dataset(seeds:Sequence[int]=DEFAULT_FACADE_SEEDS, schedule:Optional[SkySchedule]=None,
                         room:RoomModel=DEFAULT_ROOM, model:Optional[IlluminanceModel]=None,
                         cache:Optional[SdaCache]=None, progress:bool=False) -> LabeledDataset:
	'''
	143 labeled patterns per seed, rasterized to 72 × 32 images (4 px per cell, open = 1.0).

	Manifest columns: ``seed,run,wwr_pct,sda_pct,label,filename``.
	'''
	seeds = list(seeds)
	if len(seeds) == 0:
		raise ValueError("At least one seed is required.")
	schedule = schedule or SkySchedule()
	samples, rows = [], []
	for seed in seeds:
		for run, pattern in enumerate(tqdm(run_sequence(seed), desc=f"seed {seed}", disable=not progress, leave=False)):
			result = compute_sda(room, pattern, schedule, model=model, cache=cache)
			label = result.label.index
			samples.append((pattern.toImage(), label))
			rows.append((int(seed), run, round(pattern.wwr, 6), round(result.sda, 6), label, f"facade_s{seed}_r{run:03d}.pgm"))
		logger.info(f"seed {seed}: sDA {rows[-RUNS_PER_SEED][3]:.1f}% (run 0) .. {rows[-1][3]:.1f}% (run {RUNS_PER_SEED - 1})")
	manifest = Table(rows=rows, names=("seed", "run", "wwr_pct", "sda_pct", "label", "filename"),
	                 dtype=(np.int64, np.int64, float, float, np.int64, str))
	return LabeledDataset(samples, manifest, LABEL_NAMES)

def psg_ranges(dataset:LabeledDataset) -> Table:
	'''
	Per label, the count and the WWR and sDA ranges of a facade dataset.
	'''
	if len(dataset) == 0:
		raise EmptyDataset("No patterns to summarize.")
	labels = dataset.labels
	wwr = np.asarray(dataset.manifest["wwr_pct"], dtype=float)
	sda = np.asarray(dataset.manifest["sda_pct"], dtype=float)
	rows = []
	for index, name in enumerate(dataset.label_names):
		mask = labels == index
		if mask.any():
			rows.append((name, int(mask.sum()), wwr[mask].min(), wwr[mask].max(), sda[mask].min(), sda[mask].max()))
		else:
			rows.append((name, 0, np.nan, np.nan, np.nan, np.nan))
	return Table(rows=rows, names=("label", "count", "wwr_min", "wwr_max", "sda_min", "sda_max"),
	             dtype=(str, np.int64, float, float, float, float))

def ranges_from_table(table:Table) -> Tuple[Dict[str, Tuple[float, float]], Dict[str, Tuple[float, float]]]:
	''' ``(wwr ranges, sda ranges)`` dictionaries from a :func:`psg_ranges` table, skipping empty labels. '''
	wwr, sda = {}, {}
	for row in table:
		if row["count"] > 0:
			wwr[str(row["label"])] = (float(row["wwr_min"]), float(row["wwr_max"]))
			sda[str(row["label"])] = (float(row["sda_min"]), float(row["sda_max"]))
	return wwr, sda

def label_from_wwr(wwr:float, ranges:Dict[str, Tuple[float, float]]=REFERENCE_WWR_RANGES) -> str:
	'''
	Predict a label from a WWR: the label whose range contains it; between
	overlapping ranges the one with the nearest midpoint; outside all ranges the
	nearest range.
	'''
	if not ranges:
		raise ValueError("No WWR ranges to predict from.")
	containing = [name for name, (lo, hi) in ranges.items() if lo <= wwr <= hi]
	if containing:
		return min(containing, key=lambda n: (abs(wwr - sum(ranges[n]) / 2), n))
	distance = lambda n: max(ranges[n][0] - wwr, wwr - ranges[n][1])
	return min(ranges, key=lambda n: (distance(n), n))
