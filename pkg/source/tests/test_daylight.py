import logging

import pytest
import numpy as np
import astropy.units as u

from gdl.core.facade import (FacadePattern, SkySchedule, SunPosition, RoomModel, DEFAULT_ROOM, CELL_COUNT,
                             sun_position, declination, schedule_table, MIN_TIMESTEPS)
from gdl.core.illuminance import IlluminanceModel, diffuse_form_factor
from gdl.core.daylight import (PerformanceLabel, LABEL_NAMES, REFERENCE_WWR_RANGES, label_of, compute_sda, run_sequence,
                               sensor_illuminance, synth_facade_dataset, psg_ranges, ranges_from_table, label_from_wwr)
from gdl.core.exc import OutOfRangeError, ScheduleError, GridDimensionError

def _numeric_form_factor(center, size, point, subdivisions=50):
	''' Midpoint-rule integral of the form factor over a square cell on the plane y = 0. '''
	offsets = (np.arange(subdivisions) + 0.5) / subdivisions * size - size / 2
	gx, gz = np.meshgrid(center[0] + offsets, center[2] + offsets)
	elements = np.column_stack([gx.ravel(), np.zeros(gx.size), gz.ravel()])
	element_area = (size / subdivisions) ** 2
	return sum(diffuse_form_factor(e, element_area, point[None, :])[0] for e in elements)

@pytest.fixture(scope="module")
def facade_dataset():
	return synth_facade_dataset()

# solar geometry
# --------------

def test_equinox_noon():
	sun = sun_position(29.76 * u.deg, 81, 12.0)
	assert declination(81) == pytest.approx(0.0, abs=1e-9)
	assert sun.altitude == pytest.approx(60.24, abs=0.01)
	assert sun.azimuth == pytest.approx(180.0, abs=1e-6)

def test_morning_sun_is_east():
	morning = sun_position(29.76, 172, 9.0)
	afternoon = sun_position(29.76, 172, 15.0)
	assert 0 < morning.azimuth < 180 < afternoon.azimuth
	assert morning.altitude == pytest.approx(afternoon.altitude)

@pytest.mark.parametrize("day,hour", [(0, 12), (366, 12), (100, 24), (100, -1)])
def test_sun_position_range(day, hour):
	with pytest.raises(ScheduleError):
		sun_position(29.76, day, hour)

def test_default_schedule():
	schedule = SkySchedule()
	assert len(schedule) == 12 * 11
	table = schedule_table(schedule)
	assert table.colnames == ["month", "hour", "altitude_deg", "azimuth_deg", "dni_lux", "edv_lux"]
	assert sorted(set(table["month"])) == list(range(1, 13))
	up = schedule.sunUp
	assert np.all(table["dni_lux"][up] == 80000) and np.all(table["edv_lux"][up] == 10000)
	assert np.all(table["dni_lux"][~up] == 0) and np.all(table["edv_lux"][~up] == 0)

def test_default_schedule_sun_down_steps():
	# 18:00 solar time in the months with southern declination
	schedule = SkySchedule()
	down = ~schedule.sunUp
	assert down.sum() == 6
	assert set(schedule.solar_hour[down]) == {18.0}
	assert sorted(schedule.month[down]) == [1, 2, 3, 10, 11, 12]
	assert np.all(schedule.altitude[down] <= 0)

def test_sun_down_steps_contribute_nothing():
	schedule = SkySchedule()
	illuminance = IlluminanceModel.default_model().illuminance(DEFAULT_ROOM, FacadePattern.fromOpenCells(range(CELL_COUNT)), schedule)
	assert np.all(illuminance[~schedule.sunUp] == 0)
	assert np.all(illuminance[schedule.sunUp].max(axis=1) > 0)
	below = SunPosition(altitude=-1.0, azimuth=270.0)
	assert sensor_illuminance(DEFAULT_ROOM, FacadePattern.fromOpenCells(range(CELL_COUNT)), 0, below).value == 0

def test_default_schedule_length():
	assert len(SkySchedule()) >= MIN_TIMESTEPS

def test_short_schedule_is_accepted_with_a_warning(caplog):
	with caplog.at_level(logging.WARNING, logger="gdl.core"):
		schedule = SkySchedule(days=(172,), hours=tuple(range(8, 18)))
	assert len(schedule) == 10
	assert any("fewer than 100" in record.getMessage() for record in caplog.records)
	result = compute_sda(DEFAULT_ROOM, FacadePattern.fromOpenCells(range(CELL_COUNT)), schedule)
	assert 0 <= result.sda <= 100
	caplog.clear()
	with caplog.at_level(logging.WARNING, logger="gdl.core"):
		SkySchedule()
	assert not any("fewer than" in record.getMessage() for record in caplog.records)

def test_schedule_digest_changes_with_constants():
	assert SkySchedule().digest() == SkySchedule().digest()
	assert SkySchedule().digest() != SkySchedule(dni=70 * u.klx).digest()

@pytest.mark.parametrize("kwargs", [dict(days=()), dict(hours=()), dict(days=(400,)), dict(hours=(25,)), dict(edv=0)])
def test_invalid_schedule(kwargs):
	with pytest.raises(ScheduleError):
		SkySchedule(**kwargs)

# geometry and patterns
# ---------------------

def test_room_layout():
	centers = DEFAULT_ROOM.cellCenters()
	assert centers.shape == (CELL_COUNT, 3)
	assert centers[0] == pytest.approx([0.75, 0.0, 3.75])
	assert DEFAULT_ROOM.sensorCount == 256
	assert DEFAULT_ROOM.cellAt(np.array([0.75]), np.array([3.75]))[0] == 0
	assert DEFAULT_ROOM.cellAt(np.array([0.2]), np.array([3.75]))[0] == -1

def test_room_that_does_not_fit():
	with pytest.raises(GridDimensionError):
		RoomModel(width=8.0)

def test_pattern_text():
	pattern = FacadePattern.fromOpenCells([0, 17, 143])
	assert FacadePattern.fromText(pattern.toText()) == pattern
	assert pattern.wwr == pytest.approx(300 / 144)
	with pytest.raises(GridDimensionError):
		FacadePattern.fromText("0101\n")

def test_pattern_image():
	image = FacadePattern.fromOpenCells([0]).toImage()
	assert image.shape == (32, 72)
	assert image.values.sum() == 16
	assert np.all(image.values[:4, :4] == 1)

# illuminance
# -----------

def test_form_factor_matches_area_integration():
	center = np.array([5.0, 0.0, 2.0])
	point = np.array([5.0, 2.0, 0.5])
	analytic = diffuse_form_factor(center, 0.25, point[None, :])[0]
	assert analytic == pytest.approx(_numeric_form_factor(center, 0.5, point), rel=0.02)
	assert analytic == pytest.approx(0.25 * (2 / 2.5) * (1.5 / 2.5) / (np.pi * 2.5 ** 2))

def test_form_factor_behind_facade_is_zero():
	center = np.array([5.0, 0.0, 2.0])
	assert diffuse_form_factor(center, 0.25, np.array([[5.0, -1.0, 0.5], [5.0, 2.0, 3.0]])).tolist() == [0.0, 0.0]

def test_single_cell_sensor_illuminance():
	row, column = 0, 9
	pattern = FacadePattern.fromOpenCells([row * 18 + column])
	sensor_index = 2 * 16 + 8
	point = DEFAULT_ROOM.sensorPositions()[sensor_index]
	north_sun = SunPosition(altitude=60.0, azimuth=0.0)
	illuminance = sensor_illuminance(DEFAULT_ROOM, pattern, sensor_index, north_sun, edv=10 * u.klx)
	center = DEFAULT_ROOM.cellCenters()[row * 18 + column]
	expected = 10000 * _numeric_form_factor(center, 0.5, point)
	assert illuminance.unit == u.lx
	assert illuminance.to_value(u.lx) == pytest.approx(expected, rel=0.02)

def test_sensor_index_range():
	with pytest.raises(OutOfRangeError):
		sensor_illuminance(DEFAULT_ROOM, FacadePattern.allOpen(), 256, SunPosition(45, 180))

def test_illuminance_monotone_in_open_cells(short_schedule):
	model = IlluminanceModel.default_model()
	patterns = run_sequence(7)
	previous = model.illuminance(DEFAULT_ROOM, FacadePattern.allOpaque(), short_schedule)
	assert np.all(previous == 0)
	for pattern in patterns[::10] + [FacadePattern.allOpen()]:
		current = model.illuminance(DEFAULT_ROOM, pattern, short_schedule)
		assert current.shape == (len(short_schedule), DEFAULT_ROOM.sensorCount)
		assert np.all(current >= previous)
		previous = current

# sDA and labels
# --------------

@pytest.mark.parametrize("sda,label", [(0, "A"), (19.999, "A"), (20, "B"), (59.9, "C"), (60, "D"), (80, "E"), (100, "E")])
def test_label_of(sda, label):
	assert label_of(sda).value == label
	lo, hi = label_of(sda).bounds
	assert lo <= sda <= hi

@pytest.mark.parametrize("sda", [-0.1, 100.1, float("nan")])
def test_label_of_out_of_range(sda):
	with pytest.raises(OutOfRangeError):
		label_of(sda)

def test_label_order():
	assert LABEL_NAMES == ("A", "B", "C", "D", "E")
	assert [label.index for label in PerformanceLabel] == list(range(5))

def test_all_opaque():
	result = compute_sda(DEFAULT_ROOM, FacadePattern.allOpaque(), SkySchedule())
	assert result.sda == 0.0
	assert result.label is PerformanceLabel.A
	assert result.da.shape == (256,)

def test_all_open_is_maximal(short_schedule):
	best = compute_sda(DEFAULT_ROOM, FacadePattern.allOpen(), short_schedule).sda
	assert 0 < best <= 100
	assert all(compute_sda(DEFAULT_ROOM, p, short_schedule).sda <= best for p in run_sequence(11)[::5])

def test_missing_schedule():
	with pytest.raises(ScheduleError):
		compute_sda(DEFAULT_ROOM, FacadePattern.allOpen(), None)

def test_cache_hit_is_identical(temporary_cache, short_schedule):
	pattern = run_sequence(2)[70]
	uncached = compute_sda(DEFAULT_ROOM, pattern, short_schedule)
	first = compute_sda(DEFAULT_ROOM, pattern, short_schedule, cache=temporary_cache)
	second = compute_sda(DEFAULT_ROOM, pattern, short_schedule, cache=temporary_cache)
	assert len(temporary_cache) == 1
	for result in (first, second):
		assert result.sda == uncached.sda
		assert np.array_equal(result.da, uncached.da)

# nested runs and the facade dataset
# ----------------------------------

def test_run_sequence_nesting():
	runs = run_sequence(0)
	assert len(runs) == 143
	for k, pattern in enumerate(runs):
		assert pattern.openCount == k + 1
		assert pattern.wwr == 100 * (k + 1) / 144
	assert all(a.isSubsetOf(b) for a, b in zip(runs, runs[1:]))
	assert [p.bits() for p in run_sequence(0)] == [p.bits() for p in runs]
	assert [p.bits() for p in run_sequence(1)] != [p.bits() for p in runs]

def test_facade_dataset_size(facade_dataset):
	assert len(facade_dataset) == 572
	assert facade_dataset.label_names == LABEL_NAMES
	assert facade_dataset.imageShape == (32, 72)
	assert facade_dataset.manifest.colnames == ["seed", "run", "wwr_pct", "sda_pct", "label", "filename"]

def test_facade_dataset_wwr(facade_dataset):
	run = np.asarray(facade_dataset.manifest["run"])
	assert np.allclose(facade_dataset.manifest["wwr_pct"], 100 * (run + 1) / 144, atol=1e-6)

def test_facade_dataset_sda_nondecreasing(facade_dataset):
	manifest = facade_dataset.manifest
	for seed in (0, 1, 2, 3):
		sda = np.asarray(manifest["sda_pct"][manifest["seed"] == seed])
		assert len(sda) == 143
		assert np.all(np.diff(sda) >= 0)

def test_facade_dataset_labels_match_sda(facade_dataset):
	for (_, label), sda in zip(facade_dataset, facade_dataset.manifest["sda_pct"]):
		assert label == label_of(sda).index

def test_psg_ranges(facade_dataset):
	table = psg_ranges(facade_dataset)
	assert list(table["label"]) == list(LABEL_NAMES)
	assert table["count"].sum() == 572
	filled = table[table["count"] > 0]
	assert np.all(filled["wwr_min"] <= filled["wwr_max"])
	assert np.all(filled["sda_min"] <= filled["sda_max"])
	wwr_ranges, sda_ranges = ranges_from_table(table)
	assert set(wwr_ranges) == set(filled["label"])
	for name, (lo, hi) in sda_ranges.items():
		bucket_lo, bucket_hi = PerformanceLabel(name).bounds
		assert bucket_lo <= lo and hi <= bucket_hi

@pytest.mark.parametrize("wwr,label", [(0.0, "A"), (5.0, "A"), (10.0, "A"), (15.0, "B"), (35.0, "D"), (50.0, "E"), (100.0, "E")])
def test_label_from_wwr(wwr, label):
	assert label_from_wwr(wwr) == label

def test_label_from_wwr_without_ranges():
	with pytest.raises(ValueError):
		label_from_wwr(10.0, {})
	assert set(REFERENCE_WWR_RANGES) == set(LABEL_NAMES)
