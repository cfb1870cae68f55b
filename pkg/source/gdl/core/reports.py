'''
Evaluation reports of generated facades and text plots of training curves.
'''

from __future__ import annotations # remove in Python 3.10

import os
import pathlib
import dataclasses
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from astropy.table import Table

from .acgan import ConditionalGenerator, generate
from .daylight import (compute_sda, label_from_wwr, ranges_from_table, LABEL_NAMES,
                       REFERENCE_WWR_RANGES, REFERENCE_SDA_RANGES)
from .facade import RoomModel, SkySchedule, DEFAULT_ROOM
from .illuminance import IlluminanceModel
from .cache import SdaCache
from .imageproc import StructuringElement, DEFAULT_ELEMENT, DEFAULT_TOLERANCE_PCT, postprocess_facade
from .exc import EmptyDataset, InvalidLabel
from .utilities.seeds import derive_seed
from .logger import gdl_logger as logger

TABLE1_COLUMNS = ("label", "sample", "wwr_pct", "sda_pct", "wwr_label", "sda_label",
                  "psg_wwr_min", "psg_wwr_max", "psg_sda_min", "psg_sda_max")

@dataclasses.dataclass(frozen=True)
class Table1Row:
	'''
	One post-processed generated facade.

	:param label: conditioning label
	:param wwr_label: label predicted from the WWR ranges of the synthetic patterns
	:param sda_label: label of the surrogate sDA
	'''
	label: str
	sample: int
	wwr: float
	sda: float
	wwr_label: str
	sda_label: str
	psg_wwr: Tuple[float, float]
	psg_sda: Tuple[float, float]

	@property
	def agrees(self) -> bool:
		return self.label == self.wwr_label == self.sda_label

class Table1Report:
	'''
	Per conditioning label A–E: generated WWR and sDA, both label predictions and
	the reference ranges of the synthetic patterns. Disagreeing rows are kept as they are.
	'''
	def __init__(self, rows:Sequence[Table1Row]):
		if len(rows) == 0:
			raise EmptyDataset("A report needs at least one row.")
		for row in rows:
			for name in (row.label, row.wwr_label, row.sda_label):
				if name not in LABEL_NAMES:
					raise InvalidLabel(f"'{name}' is not a performance label.")
		self.rows = list(rows)

	def __len__(self):
		return len(self.rows)

	def __repr__(self):
		return f"<{self.__class__.__name__} rows={len(self.rows)} agreeing={sum(r.agrees for r in self.rows)}>"

	def toTable(self) -> Table:
		data = [(r.label, r.sample, round(r.wwr, 6), round(r.sda, 6), r.wwr_label, r.sda_label,
		         r.psg_wwr[0], r.psg_wwr[1], r.psg_sda[0], r.psg_sda[1]) for r in self.rows]
		return Table(rows=data, names=TABLE1_COLUMNS, dtype=(str, np.int64, float, float, str, str, float, float, float, float))

	def write(self, path:Union[str, os.PathLike]) -> pathlib.Path:
		path = pathlib.Path(path)
		self.toTable().write(path, format="ascii.csv", overwrite=True)
		return path

	def meanWwr(self) -> Dict[str, float]:
		''' Mean generated WWR per conditioning label, in label order. '''
		means = {}
		for name in LABEL_NAMES:
			values = [r.wwr for r in self.rows if r.label == name]
			if values:
				means[name] = float(np.mean(values))
		return means

	def confusion(self) -> np.ndarray:
		''' Conditioning label (rows) × sDA label (columns) counts. '''
		matrix = np.zeros((len(LABEL_NAMES), len(LABEL_NAMES)), dtype=np.int64)
		for r in self.rows:
			matrix[LABEL_NAMES.index(r.label), LABEL_NAMES.index(r.sda_label)] += 1
		return matrix

	def confusionTable(self) -> Table:
		matrix = self.confusion()
		table = Table([list(LABEL_NAMES)], names=("label",))
		for j, name in enumerate(LABEL_NAMES):
			table[name] = matrix[:, j]
		return table

	def writeConfusion(self, path:Union[str, os.PathLike]) -> pathlib.Path:
		path = pathlib.Path(path)
		self.confusionTable().write(path, format="ascii.csv", overwrite=True)
		return path

def make_table1_report(generator:ConditionalGenerator, n:int=1, seed:int=0, schedule:Optional[SkySchedule]=None,
                       room:RoomModel=DEFAULT_ROOM, model:Optional[IlluminanceModel]=None,
                       cache:Optional[SdaCache]=None, psg:Optional[Table]=None,
                       se:StructuringElement=DEFAULT_ELEMENT, tolerance_pct:float=DEFAULT_TOLERANCE_PCT) -> Table1Report:
	'''
	Generate ``n`` facades per label, post-process them and score them.

	Each image is binarized, cleaned with :func:`~gdl.core.imageproc.ratio_preserving_clean`
	and snapped to the cell grid before its WWR and surrogate sDA are computed.

	:param generator: a trained facade generator (label space A–E)
	:param psg: per-label ranges of the training patterns (:func:`~gdl.core.daylight.psg_ranges`);
	            the reference ranges are used when omitted
	:raises EmptyDataset: if ``n`` < 1
	:raises UntrainedModelError: if the generator was never trained or loaded
	'''
	if n < 1:
		raise EmptyDataset("The report needs at least one sample per label.")
	if tuple(generator.spec.label_names) != LABEL_NAMES:
		raise InvalidLabel(f"A facade generator must be conditioned on {LABEL_NAMES}; got {generator.spec.label_names}.")
	schedule = schedule or SkySchedule()
	wwr_ranges, sda_ranges = REFERENCE_WWR_RANGES, REFERENCE_SDA_RANGES
	if psg is not None:
		wwr_ranges, sda_ranges = ranges_from_table(psg)

	rows = []
	for index, name in enumerate(LABEL_NAMES):
		images = generate(generator, index, n, derive_seed(seed, "table1", index))
		for sample, image in enumerate(images):
			pattern = postprocess_facade(image, se, tolerance_pct)
			result = compute_sda(room, pattern, schedule, model=model, cache=cache)
			rows.append(Table1Row(label=name, sample=sample, wwr=pattern.wwr, sda=result.sda,
			                      wwr_label=label_from_wwr(pattern.wwr, wwr_ranges),
			                      sda_label=result.label.value,
			                      psg_wwr=wwr_ranges.get(name, (np.nan, np.nan)),
			                      psg_sda=sda_ranges.get(name, (np.nan, np.nan))))
		logger.debug(f"label {name}: mean WWR {np.mean([r.wwr for r in rows[-n:]]):.1f}%")
	return Table1Report(rows)

PLOT_MARKERS = "*o+x#"

def ascii_plot(series:Mapping[str, Sequence[float]], width:int=60, height:int=12, title:Optional[str]=None) -> str:
	'''
	Render one or more curves as text, x being the sample index.

	Non-finite values are skipped. Later series overwrite earlier ones where they overlap.
	'''
	if width < 2 or height < 2:
		raise ValueError("A plot needs at least 2x2 characters.")
	curves = {name: np.asarray(values, dtype=float) for name, values in series.items()}
	finite = np.concatenate([v[np.isfinite(v)] for v in curves.values()] or [np.empty(0)])
	lines = [title] if title else []
	if finite.size == 0:
		lines.append("(no data)")
		return "\n".join(lines)
	lo, hi = float(finite.min()), float(finite.max())
	if hi == lo:
		hi = lo + 1.0
	length = max(len(v) for v in curves.values())
	canvas = np.full((height, width), " ")
	for k, values in enumerate(curves.values()):
		marker = PLOT_MARKERS[k % len(PLOT_MARKERS)]
		for i, value in enumerate(values):
			if not np.isfinite(value):
				continue
			col = 0 if length == 1 else int(round(i * (width - 1) / (length - 1)))
			row = int(round((hi - value) * (height - 1) / (hi - lo)))
			canvas[row, col] = marker
	label_width = max(len(f"{hi:.3g}"), len(f"{lo:.3g}"))
	for r in range(height):
		tick = f"{hi:.3g}" if r == 0 else f"{lo:.3g}" if r == height - 1 else ""
		lines.append(f"{tick:>{label_width}} |" + "".join(canvas[r]))
	lines.append(" " * label_width + " +" + "-" * width)
	lines.append(" " * label_width + "  " + "  ".join(f"{PLOT_MARKERS[k % len(PLOT_MARKERS)]} {name}"
	                                                 for k, name in enumerate(curves)))
	return "\n".join(lines)
