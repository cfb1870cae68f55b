'''
Room and facade geometry, facade patterns, solar position and the sky schedule.

Room coordinates (metres): ``x`` eastward along the facade, ``y`` northward
into the room, ``z`` up. The glazed facade is the south wall, the plane
``y = 0``, with its normal ``+y`` pointing into the room. Facade cell rows are
numbered from the top: row 0 spans ``z`` ∈ [3.5, 4.0].
'''

from __future__ import annotations # remove in Python 3.10

import hashlib
import dataclasses
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np
import astropy.units as u
from astropy.table import Table

from .exc import GridDimensionError, ScheduleError
from .imagegrid import ImageGrid
from .logger import gdl_logger as logger

GRID_COLUMNS = 18
GRID_ROWS = 8
CELL_COUNT = GRID_COLUMNS * GRID_ROWS
PIXELS_PER_CELL = 4

# day of year of the 15th of each month (non-leap year)
MONTH_START_DAY = (0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334)
REPRESENTATIVE_DAYS = tuple(d + 15 for d in MONTH_START_DAY)
OCCUPIED_HOURS = tuple(range(8, 19)) # 08:00 .. 18:00 solar time, inclusive
MIN_TIMESTEPS = 100

HOUSTON_LATITUDE = 29.76 * u.deg
DIRECT_NORMAL_ILLUMINANCE = 80000 * u.lx
DIFFUSE_VERTICAL_ILLUMINANCE = 10000 * u.lx

def _to_value(value, unit) -> float:
	''' Accept a bare number (assumed in ``unit``) or an astropy quantity. '''
	return float(u.Quantity(value, unit).to_value(unit))

@dataclasses.dataclass(frozen=True)
class RoomModel:
	'''
	A shoebox room with a gridded south facade and a horizontal sensor grid.

	The facade grid has a horizontal margin only; cell rows fill the wall height
	from the floor (0–4 m). See ``docs/daylight.rst`` for this deviation from a
	margin on all sides.
	'''
	width: float = 10.0
	depth: float = 10.0
	height: float = 4.0
	columns: int = GRID_COLUMNS
	rows: int = GRID_ROWS
	cell_size: float = 0.5
	margin: float = 0.5
	sensor_height: float = 0.75
	sensor_spacing: float = 0.6
	sensors_per_side: int = 16

	def __post_init__(self):
		if not np.isclose(2 * self.margin + self.columns * self.cell_size, self.width):
			raise GridDimensionError(f"{self.columns} columns of {self.cell_size} m plus {self.margin} m margins do not span the {self.width} m facade.")
		if self.rows * self.cell_size > self.height + 1e-9:
			raise GridDimensionError(f"{self.rows} rows of {self.cell_size} m do not fit on a {self.height} m wall.")
		span = (self.sensors_per_side - 1) * self.sensor_spacing
		if span >= min(self.width, self.depth):
			raise GridDimensionError("The sensor grid does not fit inside the floor.")

	@property
	def cellCount(self) -> int:
		return self.rows * self.columns

	@property
	def cellArea(self) -> float:
		return self.cell_size ** 2

	def cellBounds(self, row:int, column:int) -> Tuple[float, float, float, float]:
		''' ``(x0, x1, z0, z1)`` of one cell. '''
		x0 = self.margin + column * self.cell_size
		z1 = self.height - row * self.cell_size
		return x0, x0 + self.cell_size, z1 - self.cell_size, z1

	def cellCenters(self) -> np.ndarray:
		''' ``(rows·columns, 3)`` cell centres, row-major (index = row·columns + column). '''
		r, c = np.divmod(np.arange(self.cellCount), self.columns)
		x = self.margin + (c + 0.5) * self.cell_size
		z = self.height - (r + 0.5) * self.cell_size
		return np.column_stack([x, np.zeros_like(x), z])

	def sensorPositions(self) -> np.ndarray:
		''' ``(n², 3)`` sensor positions, centred in the floor plan; index = iy·n + ix. '''
		n = self.sensors_per_side
		span = (n - 1) * self.sensor_spacing
		xs = (self.width - span) / 2 + self.sensor_spacing * np.arange(n)
		ys = (self.depth - span) / 2 + self.sensor_spacing * np.arange(n)
		gy, gx = np.meshgrid(ys, xs, indexing="ij")
		return np.column_stack([gx.ravel(), gy.ravel(), np.full(gx.size, self.sensor_height)])

	@property
	def sensorCount(self) -> int:
		return self.sensors_per_side ** 2

	def cellAt(self, x:np.ndarray, z:np.ndarray) -> np.ndarray:
		'''
		Cell index of facade points ``(x, 0, z)``, or −1 outside the grid. Cells are half-open: [x0, x1) × (z0, z1].
		'''
		column = np.floor((np.asarray(x) - self.margin) / self.cell_size).astype(np.int64)
		row = np.floor((self.height - np.asarray(z)) / self.cell_size).astype(np.int64)
		inside = (column >= 0) & (column < self.columns) & (row >= 0) & (row < self.rows)
		return np.where(inside, row * self.columns + column, -1)

	def digest(self) -> str:
		return hashlib.sha256(repr(dataclasses.astuple(self)).encode()).hexdigest()[:16]

DEFAULT_ROOM = RoomModel()

class FacadePattern:
	'''
	An 18 × 8 grid of facade cells; ``True`` is a window (open), ``False`` opaque.

	:param cells: boolean array of shape ``(8, 18)``, row 0 at the top
	'''
	def __init__(self, cells):
		cells = np.array(cells, dtype=bool)
		if cells.shape != (GRID_ROWS, GRID_COLUMNS):
			raise GridDimensionError(f"A facade pattern is {GRID_ROWS}x{GRID_COLUMNS} cells; got {cells.shape}.")
		cells.setflags(write=False)
		self._cells = cells

	def __repr__(self):
		return f"<{self.__class__.__name__} open={self.openCount}/{CELL_COUNT} wwr={self.wwr:.3f}%>"

	def __eq__(self, other):
		if not isinstance(other, FacadePattern):
			return NotImplemented
		return np.array_equal(self._cells, other._cells)

	def __hash__(self):
		return hash(self.bits())

	@classmethod
	def allOpen(cls) -> FacadePattern:
		return cls(np.ones((GRID_ROWS, GRID_COLUMNS), dtype=bool))

	@classmethod
	def allOpaque(cls) -> FacadePattern:
		return cls(np.zeros((GRID_ROWS, GRID_COLUMNS), dtype=bool))

	@classmethod
	def fromOpenCells(cls, indices:Iterable[int]) -> FacadePattern:
		''' A pattern whose open cells are the given row-major indices. '''
		flat = np.zeros(CELL_COUNT, dtype=bool)
		flat[np.asarray(list(indices), dtype=np.int64)] = True
		return cls(flat.reshape(GRID_ROWS, GRID_COLUMNS))

	@property
	def cells(self) -> np.ndarray:
		return self._cells

	@property
	def flat(self) -> np.ndarray:
		''' Row-major cell vector (index = row·18 + column). '''
		return self._cells.ravel()

	@property
	def openCount(self) -> int:
		return int(self._cells.sum())

	@property
	def wwr(self) -> float:
		''' Window-to-wall ratio in percent: 100 · open cells / 144. '''
		return 100.0 * self.openCount / CELL_COUNT

	def isSubsetOf(self, other:FacadePattern) -> bool:
		return bool(np.all(other._cells | ~self._cells))

	def bits(self) -> str:
		''' The cells as a 144-character ``0``/``1`` string, row-major. '''
		return "".join("1" if v else "0" for v in self.flat)

	def toText(self) -> str:
		''' 8 lines of 18 ``0``/``1`` characters, row 0 first. '''
		return "".join("".join("1" if v else "0" for v in row) + "\n" for row in self._cells)

	@classmethod
	def fromText(cls, text:str) -> FacadePattern:
		lines = [line.strip() for line in text.strip().splitlines() if line.strip()]
		if len(lines) != GRID_ROWS or any(len(line) != GRID_COLUMNS or set(line) - {"0", "1"} for line in lines):
			raise GridDimensionError(f"A pattern file must hold {GRID_ROWS} lines of {GRID_COLUMNS} '0'/'1' characters.")
		return cls([[c == "1" for c in line] for line in lines])

	def toImage(self, pixels_per_cell:int=PIXELS_PER_CELL) -> ImageGrid:
		''' Rasterize: each cell becomes a square block, open = 1.0 (72 × 32 pixels by default). '''
		block = np.ones((pixels_per_cell, pixels_per_cell), dtype=np.float32)
		return ImageGrid(np.kron(self._cells.astype(np.float32), block))

# solar geometry
# --------------

@dataclasses.dataclass(frozen=True)
class SunPosition:
	'''
	:param altitude: degrees above the horizon, in [−90, 90]
	:param azimuth: degrees clockwise from north, in [0, 360)
	'''
	altitude: float
	azimuth: float

	@property
	def isUp(self) -> bool:
		return self.altitude > 0

	def direction(self) -> np.ndarray:
		''' Unit vector toward the sun in room coordinates (x east, y north, z up). '''
		alt, az = np.radians(self.altitude), np.radians(self.azimuth)
		return np.array([np.sin(az) * np.cos(alt), np.cos(az) * np.cos(alt), np.sin(alt)])

def declination(day_of_year) -> np.ndarray:
	''' Solar declination in degrees: 23.45 · sin(360 · (284 + day) / 365). '''
	return 23.45 * np.sin(np.radians(360.0 * (284 + np.asarray(day_of_year, dtype=np.float64)) / 365.0))

def solar_angles(latitude:float, day_of_year, solar_hour) -> Tuple[np.ndarray, np.ndarray]:
	'''
	Vectorized altitude and azimuth (degrees) for arrays of days and solar hours at one latitude (degrees).
	'''
	phi = np.radians(latitude)
	delta = np.radians(declination(day_of_year))
	hour_angle = np.radians(15.0 * (np.asarray(solar_hour, dtype=np.float64) - 12.0))
	sin_alt = np.sin(phi) * np.sin(delta) + np.cos(phi) * np.cos(delta) * np.cos(hour_angle)
	altitude = np.arcsin(np.clip(sin_alt, -1, 1))
	denominator = np.cos(altitude) * np.cos(phi)
	with np.errstate(divide="ignore", invalid="ignore"):
		cos_az = (np.sin(delta) - np.sin(altitude) * np.sin(phi)) / denominator
	# sun at the zenith: azimuth is undefined, report due south
	cos_az = np.where(np.abs(denominator) < 1e-12, -1.0, cos_az)
	azimuth = np.degrees(np.arccos(np.clip(cos_az, -1, 1)))
	azimuth = np.where(hour_angle > 0, 360.0 - azimuth, azimuth) % 360.0
	return np.degrees(altitude), azimuth

def sun_position(latitude, day_of_year:int, solar_hour:float) -> SunPosition:
	'''
	Sun altitude and azimuth from declination and hour angle.

	:param latitude: degrees north (number or angle quantity)
	:param day_of_year: 1..365
	:param solar_hour: local solar time in [0, 24); 12 is solar noon
	'''
	if not 1 <= day_of_year <= 365:
		raise ScheduleError(f"day_of_year must lie in 1..365; got {day_of_year}.")
	if not 0 <= solar_hour < 24:
		raise ScheduleError(f"solar_hour must lie in [0, 24); got {solar_hour}.")
	altitude, azimuth = solar_angles(_to_value(latitude, u.deg), day_of_year, solar_hour)
	return SunPosition(float(altitude), float(azimuth))

class SkySchedule:
	'''
	Occupied timesteps with their sun positions and clear-sky illuminance constants.

	The default schedule is the 15th of every month at the whole solar hours
	08:00–18:00 (132 timesteps) for Houston (29.76° N).

	Timesteps with the sun at or below the horizon stay in the schedule (they
	count as occupied hours) but carry zero direct and diffuse illuminance.
	Schedules shorter than :data:`MIN_TIMESTEPS` are accepted with a warning.

	:param latitude: degrees north (number or angle quantity)
	:param days: representative days of year
	:param hours: solar hours evaluated on each day
	:param dni: direct-normal illuminance (lux or quantity)
	:param edv: diffuse vertical facade illuminance (lux or quantity)
	'''
	def __init__(self, latitude=HOUSTON_LATITUDE, days:Sequence[int]=REPRESENTATIVE_DAYS, hours:Sequence[float]=OCCUPIED_HOURS,
	             dni=DIRECT_NORMAL_ILLUMINANCE, edv=DIFFUSE_VERTICAL_ILLUMINANCE):
		self.latitude = _to_value(latitude, u.deg)
		self.days = tuple(int(d) for d in days)
		self.hours = tuple(float(h) for h in hours)
		if len(self.days) == 0 or len(self.hours) == 0:
			raise ScheduleError("A sky schedule needs at least one day and one hour.")
		for d in self.days:
			if not 1 <= d <= 365:
				raise ScheduleError(f"Day {d} is outside 1..365.")
		for h in self.hours:
			if not 0 <= h < 24:
				raise ScheduleError(f"Hour {h} is outside [0, 24).")
		dni, edv = _to_value(dni, u.lx), _to_value(edv, u.lx)
		if dni <= 0 or edv <= 0:
			raise ScheduleError("Illuminance constants must be positive.")

		day_grid, hour_grid = np.meshgrid(self.days, self.hours, indexing="ij")
		self.day_of_year = day_grid.ravel()
		self.solar_hour = hour_grid.ravel()
		self.altitude, self.azimuth = solar_angles(self.latitude, self.day_of_year, self.solar_hour)
		self.sunUp = self.altitude > 0
		self.dni = np.where(self.sunUp, dni, 0.0)
		self.edv = np.where(self.sunUp, edv, 0.0)
		if len(self) < MIN_TIMESTEPS:
			logger.warning(f"sky schedule has {len(self)} timesteps (fewer than {MIN_TIMESTEPS}); sDA from it is coarse")

	def __repr__(self):
		return f"<{self.__class__.__name__} latitude={self.latitude} timesteps={len(self)}>"

	def __len__(self):
		return int(self.day_of_year.size)

	@property
	def month(self) -> np.ndarray:
		''' Month number (1–12) of each timestep. '''
		return np.searchsorted(np.array(MONTH_START_DAY), self.day_of_year, side="left")

	def sun(self, step:int) -> SunPosition:
		return SunPosition(float(self.altitude[step]), float(self.azimuth[step]))

	def sunDirections(self) -> np.ndarray:
		''' ``(T, 3)`` unit vectors toward the sun. '''
		alt, az = np.radians(self.altitude), np.radians(self.azimuth)
		return np.column_stack([np.sin(az) * np.cos(alt), np.cos(az) * np.cos(alt), np.sin(alt)])

	def digest(self) -> str:
		sha = hashlib.sha256()
		for array in (np.array([self.latitude]), self.day_of_year.astype(np.float64), self.solar_hour, self.dni, self.edv):
			sha.update(np.ascontiguousarray(array, dtype="<f8").tobytes())
		return sha.hexdigest()[:16]

def schedule_table(schedule:SkySchedule) -> Table:
	''' One row per timestep: ``month,hour,altitude_deg,azimuth_deg,dni_lux,edv_lux``. '''
	table = Table()
	table["month"] = schedule.month
	table["hour"] = schedule.solar_hour
	table["altitude_deg"] = np.round(schedule.altitude, 4)
	table["azimuth_deg"] = np.round(schedule.azimuth, 4)
	table["dni_lux"] = schedule.dni
	table["edv_lux"] = schedule.edv
	return table
