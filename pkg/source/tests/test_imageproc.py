
import pytest
import numpy as np

from gdl.core.imagegrid import ImageGrid
from gdl.core.facade import FacadePattern
from gdl.core.imageproc import (BinaryImage, StructuringElement, DEFAULT_ELEMENT, binarize, complement, reflect, erode,
                                dilate, opening, closing, ratio_preserving_clean, snap_to_grid, postprocess_facade, wwr)
from gdl.core.exc import GridDimensionError

def _offsets(se):
	return [(r - se.anchor[0], c - se.anchor[1]) for r, c in zip(*np.nonzero(se.mask))]

def _pixel(x, r, c):
	h, w = x.shape
	return bool(x[r, c]) if 0 <= r < h and 0 <= c < w else False

def brute_erode(x, se):
	h, w = x.shape
	return np.array([[all(_pixel(x, r + dr, c + dc) for dr, dc in _offsets(se)) for c in range(w)] for r in range(h)])

def brute_dilate(x, se):
	h, w = x.shape
	return np.array([[any(_pixel(x, r - dr, c - dc) for dr, dc in _offsets(se)) for c in range(w)] for r in range(h)])

def random_cases(count=100, size=16, seed=0):
	rng = np.random.default_rng(seed)
	for _ in range(count):
		image = rng.random((size, size)) < rng.uniform(0.2, 0.8)
		mask = rng.random((3, 3)) < 0.6
		mask[rng.integers(3), rng.integers(3)] = True
		anchor = (int(rng.integers(3)), int(rng.integers(3)))
		yield BinaryImage(image), StructuringElement(mask, anchor)

def blobs(size=32, seed=0, noise=0.05):
	''' A few white rectangles with salt-and-pepper noise. '''
	rng = np.random.default_rng(seed)
	x = np.zeros((size, size), dtype=bool)
	for _ in range(3):
		r, c = rng.integers(0, size - 8, size=2)
		x[r:r + rng.integers(4, 9), c:c + rng.integers(4, 9)] = True
	return BinaryImage(x ^ (rng.random(x.shape) < noise))

# structuring elements
# --------------------

def test_default_element_is_cross():
	assert DEFAULT_ELEMENT.mask.tolist() == [[False, True, False], [True, True, True], [False, True, False]]
	assert DEFAULT_ELEMENT.anchor == (1, 1)
	assert DEFAULT_ELEMENT.containsAnchor

def test_reflected_element():
	se = StructuringElement([[1, 1, 0], [0, 0, 0]], anchor=(0, 2))
	flipped = reflect(se)
	assert flipped.mask.tolist() == [[False, False, False], [False, True, True]]
	assert flipped.anchor == (1, 0)
	assert not flipped.containsAnchor
	assert reflect(flipped).mask.tolist() == se.mask.tolist()

@pytest.mark.parametrize("mask,anchor", [([[0, 0], [0, 0]], None), ([[1, 1]], (1, 0)), ([1, 1, 1], None)])
def test_invalid_element(mask, anchor):
	with pytest.raises(ValueError):
		StructuringElement(mask, anchor)

# morphology
# ----------

def test_erosion_matches_definition():
	for image, se in random_cases():
		assert np.array_equal(erode(image, se).values, brute_erode(image.values, se))

def test_dilation_matches_definition():
	for image, se in random_cases(seed=1):
		assert np.array_equal(dilate(image, se).values, brute_dilate(image.values, se))

def test_opening_is_anti_extensive_and_idempotent():
	for image, se in random_cases(seed=2):
		opened = opening(image, se)
		assert opened.isSubsetOf(image)
		assert opening(opened, se) == opened

def test_erosion_inside_image_when_anchor_in_element():
	for image, se in random_cases(seed=3):
		if se.containsAnchor:
			assert erode(image, se).isSubsetOf(image)
			assert image.isSubsetOf(dilate(image, se))

def test_duality_away_from_border():
	pad = 3
	for image, se in random_cases(seed=4):
		padded = BinaryImage(np.pad(image.values, pad))
		left = complement(dilate(padded, se)).values
		right = erode(complement(padded), reflect(se)).values
		inner = (slice(pad, -pad), slice(pad, -pad))
		assert np.array_equal(left[inner], right[inner])

def test_closing_fills_pinhole():
	x = np.ones((9, 9), dtype=bool)
	x[4, 4] = False
	closed = closing(BinaryImage(x))
	assert closed.values[4, 4]

# ratio-preserving cleanup
# ------------------------

def test_single_salt_pixel_removed():
	x = np.zeros((16, 16), dtype=bool)
	x[7, 9] = True
	assert not ratio_preserving_clean(BinaryImage(x)).values.any()

@pytest.mark.parametrize("seed", range(20))
def test_ratio_drift_within_tolerance(seed):
	image = blobs(seed=seed, noise=0.15)
	cleaned = ratio_preserving_clean(image, tolerance_pct=2.0)
	assert abs(cleaned.whitePercent - image.whitePercent) <= 2.0

@pytest.mark.parametrize("seed", range(5))
def test_zero_tolerance_restores_count(seed):
	image = blobs(seed=seed, noise=0.2)
	assert ratio_preserving_clean(image, tolerance_pct=0).values.sum() == image.values.sum()

@pytest.mark.parametrize("seed", range(5))
def test_full_tolerance_is_plain_open_close(seed):
	image = blobs(seed=seed)
	assert ratio_preserving_clean(image, tolerance_pct=100) == closing(opening(image))

def test_cleanup_deterministic():
	image = blobs(seed=9, noise=0.2)
	assert ratio_preserving_clean(image, tolerance_pct=0.5) == ratio_preserving_clean(image, tolerance_pct=0.5)

def test_negative_tolerance():
	with pytest.raises(ValueError):
		ratio_preserving_clean(blobs(), tolerance_pct=-1)

# thresholding, grid snapping and I/O
# -----------------------------------

def test_binarize_threshold():
	image = ImageGrid(np.array([[0.49, 0.5], [0.51, 1.0]]))
	assert binarize(image).values.tolist() == [[False, True], [True, True]]
	assert binarize(image, 0.75).values.tolist() == [[False, False], [False, True]]
	for threshold in (0.0, 1.0):
		with pytest.raises(ValueError):
			binarize(image, threshold)

def test_snap_to_grid():
	pattern = FacadePattern.fromOpenCells(range(0, 144, 5))
	assert snap_to_grid(binarize(pattern.toImage())) == pattern

def test_snap_half_block_is_open():
	x = np.zeros((32, 72), dtype=bool)
	x[0:2, 0:4] = True  # half of cell (0, 0)
	x[4:5, 4:8] = True  # a quarter of cell (1, 1)
	pattern = snap_to_grid(BinaryImage(x))
	assert pattern.cells[0, 0]
	assert not pattern.cells[1, 1]
	assert pattern.openCount == 1
	assert wwr(pattern) == pytest.approx(100 / 144)

@pytest.mark.parametrize("shape", [(30, 72), (32, 70)])
def test_snap_requires_whole_cells(shape):
	with pytest.raises(GridDimensionError):
		snap_to_grid(BinaryImage(np.zeros(shape, dtype=bool)))

@pytest.mark.parametrize("pattern", [FacadePattern.allOpaque(), FacadePattern.allOpen(),
                                     FacadePattern([[2 <= r <= 5 and 3 <= c <= 14 for c in range(18)] for r in range(8)])])
def test_postprocess_recovers_clean_pattern(pattern):
	assert postprocess_facade(pattern.toImage()) == pattern

def test_postprocess_removes_speckle():
	pattern = FacadePattern([[r >= 4 for c in range(18)] for r in range(8)])
	values = pattern.toImage().values.copy()
	values[1, 30] = 0.9
	values[20, 40] = 0.1
	assert postprocess_facade(ImageGrid(values)) == pattern

def test_pgm_round_trip(tmp_path):
	image = blobs(seed=4)
	path = image.toPGM(tmp_path / "mask.pgm")
	assert BinaryImage.fromPGM(path) == image
