'''
Illuminance models: map (room, facade pattern, sky schedule) to the
illuminance at every sensor and timestep.
'''

from __future__ import annotations # remove in Python 3.10

from abc import ABC, abstractmethod
from typing import Dict, Tuple

import numpy as np

from .facade import RoomModel, FacadePattern, SkySchedule, SunPosition
from .logger import gdl_logger as logger

def diffuse_form_factor(cell_center:np.ndarray, area:float, points:np.ndarray) -> np.ndarray:
	'''
	Point-to-area coupling of a small facade cell to horizontal receiving points:
	``A · cosθ_cell · cosθ_point / (π · r²)``.

	``θ_cell`` is measured from the facade normal (+y), ``θ_point`` from the
	upward normal of the receiving point; a negative cosine on either side
	gives zero. Multiplying by the vertical diffuse illuminance of the cell
	gives lux.

	:param cell_center: ``(3,)`` centre of the cell on the plane ``y = 0``
	:param area: cell area (m²)
	:param points: ``(n, 3)`` receiving points
	'''
	v = cell_center[None, :] - points # point -> cell
	r2 = np.sum(v * v, axis=1)
	r = np.sqrt(r2)
	cos_cell = -v[:, 1] / r           # cell -> point, against the +y normal
	cos_point = v[:, 2] / r
	factor = area * np.clip(cos_cell, 0, None) * np.clip(cos_point, 0, None) / (np.pi * r2)
	return factor

class IlluminanceModel(ABC):
	'''
	Computes sensor illuminance for facade patterns.

	This is an abstract base class; :meth:`default_model` returns the package's
	clear-sky surrogate.
	'''
	_default_instance = None

	def __repr__(self):
		return f"<{self.__class__.__name__} object at {hex(id(self))}>"

	@classmethod
	def default_model(cls) -> IlluminanceModel:
		'''
		A model preconfigured to be used out of the box; one shared instance.
		'''
		if IlluminanceModel._default_instance is None:
			IlluminanceModel._default_instance = ClearSkySurrogate()
		return IlluminanceModel._default_instance

	@property
	def name(self) -> str:
		return self.__class__.__name__

	@abstractmethod
	def illuminance(self, room:RoomModel, pattern:FacadePattern, schedule:SkySchedule) -> np.ndarray:
		'''
		Illuminance (lux) as a ``(timesteps, sensors)`` array.
		'''
		pass # subclass to implement

	@abstractmethod
	def pointIlluminance(self, room:RoomModel, pattern:FacadePattern, sensor_index:int, sun:SunPosition,
	                     dni:float, edv:float) -> Tuple[float, float]:
		'''
		``(direct, diffuse)`` illuminance in lux at one sensor for one sun position.
		'''
		pass # subclass to implement

class ClearSkySurrogate(IlluminanceModel):
	'''
	Analytic clear-sky model: sky-diffuse light through open cells plus direct
	sun through the cell the sun ray crosses. No interreflection.

	* diffuse: every open cell radiates with luminance ``E_dv / π`` and couples
	  to each sensor through :func:`diffuse_form_factor` (cell centre, 0.25 m²).
	  :class:`SkySchedule` sets ``E_dv`` to zero at sun-down steps, and
	  :meth:`pointIlluminance` returns zero for a sun below the horizon.
	* direct: ``DNI · sin(altitude)`` when the sun is up, within ±90° of due
	  south, and the ray from the sensor toward the sun leaves through an open cell.

	Both terms grow with the set of open cells, so illuminance (and therefore
	sDA) is monotone in the pattern.

	The coupling matrix and the sun-ray cell hits depend only on the room and
	the schedule and are computed once per pair.
	'''
	def __init__(self):
		self._coupling: Dict[str, np.ndarray] = {}
		self._hits: Dict[Tuple[str, str], np.ndarray] = {}

	def coupling(self, room:RoomModel) -> np.ndarray:
		''' ``(sensors, cells)`` diffuse form factors. '''
		key = room.digest()
		if key not in self._coupling:
			sensors = room.sensorPositions()
			centers = room.cellCenters()
			self._coupling[key] = np.column_stack([diffuse_form_factor(c, room.cellArea, sensors) for c in centers])
			logger.debug(f"computed diffuse coupling {self._coupling[key].shape} for room {key}")
		return self._coupling[key]

	def sunHits(self, room:RoomModel, schedule:SkySchedule) -> np.ndarray:
		'''
		``(timesteps, sensors)`` index of the facade cell each sensor's sun ray crosses, −1 when none (sun down, behind the facade, or ray outside the grid).
		'''
		key = (room.digest(), schedule.digest())
		if key not in self._hits:
			self._hits[key] = self._rayCells(room, schedule.sunDirections(), schedule.altitude)
		return self._hits[key]

	@staticmethod
	def _rayCells(room:RoomModel, directions:np.ndarray, altitude:np.ndarray) -> np.ndarray:
		sensors = room.sensorPositions()
		dy = directions[:, 1]
		usable = (altitude > 0) & (dy < 0) # above the horizon and south of the east-west line
		with np.errstate(divide="ignore", invalid="ignore"):
			t = -sensors[None, :, 1] / dy[:, None] # ray parameter where y reaches 0
		x = sensors[None, :, 0] + t * directions[:, 0:1]
		z = sensors[None, :, 2] + t * directions[:, 2:3]
		cells = room.cellAt(np.where(usable[:, None], x, -1.0), np.where(usable[:, None], z, -1.0))
		return np.where(usable[:, None], cells, -1)

	def illuminance(self, room:RoomModel, pattern:FacadePattern, schedule:SkySchedule) -> np.ndarray:
		open_cells = pattern.flat.astype(np.float64)
		diffuse_per_lux = self.coupling(room) @ open_cells # (sensors,)
		# edv is zero at sun-down steps
		diffuse = schedule.edv[:, None] * diffuse_per_lux[None, :]

		hits = self.sunHits(room, schedule)
		lit = np.zeros(hits.shape, dtype=bool)
		valid = hits >= 0
		lit[valid] = pattern.flat[hits[valid]]
		direct = (schedule.dni * np.sin(np.radians(schedule.altitude)))[:, None] * lit
		return diffuse + direct

	def pointIlluminance(self, room:RoomModel, pattern:FacadePattern, sensor_index:int, sun:SunPosition,
	                     dni:float, edv:float) -> Tuple[float, float]:
		if not sun.isUp:
			return 0.0, 0.0
		diffuse = edv * float(self.coupling(room)[sensor_index] @ pattern.flat.astype(np.float64))
		cell = self._rayCells(room, sun.direction()[None, :], np.array([sun.altitude]))[0, sensor_index]
		direct = dni * np.sin(np.radians(sun.altitude)) if cell >= 0 and pattern.flat[cell] else 0.0
		return float(direct), diffuse
