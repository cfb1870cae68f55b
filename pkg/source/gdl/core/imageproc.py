'''
Binary post-processing of generated images: thresholding, morphology,
ratio-preserving cleanup and snapping facade images back to the cell grid.

Erosion and dilation follow the Minkowski definitions with the anchor as
origin; pixels outside the image count as background for both.
'''

from __future__ import annotations # remove in Python 3.10

import os
import pathlib
from typing import Optional, Tuple, Union

import cv2
import numpy as np

from .imagegrid import ImageGrid
from .facade import FacadePattern, GRID_COLUMNS, GRID_ROWS
from .exc import GridDimensionError
from .logger import gdl_logger as logger

DEFAULT_TOLERANCE_PCT = 2.0

class BinaryImage:
	'''
	A boolean image; ``True`` is white (foreground).

	:param values: 2D array-like, interpreted as booleans
	'''
	def __init__(self, values):
		values = np.array(values, dtype=bool)
		if values.ndim != 2:
			raise GridDimensionError(f"A binary image must be 2D; got shape {values.shape}.")
		values.setflags(write=False)
		self._values = values

	def __repr__(self):
		return f"<{self.__class__.__name__} {self.height}x{self.width} white={self.whitePercent:.2f}%>"

	def __eq__(self, other):
		if not isinstance(other, BinaryImage):
			return NotImplemented
		return np.array_equal(self._values, other._values)

	__hash__ = None

	@property
	def values(self) -> np.ndarray:
		return self._values

	@property
	def height(self) -> int:
		return self._values.shape[0]

	@property
	def width(self) -> int:
		return self._values.shape[1]

	@property
	def shape(self) -> tuple:
		return self._values.shape

	@property
	def whitePercent(self) -> float:
		return 100.0 * float(self._values.mean()) if self._values.size else 0.0

	def isSubsetOf(self, other:BinaryImage) -> bool:
		return bool(np.all(other._values | ~self._values))

	def toImage(self) -> ImageGrid:
		return ImageGrid(self._values.astype(np.float32))

	def toPGM(self, path:Union[str, os.PathLike]) -> pathlib.Path:
		''' PGM with values {0, 255}. '''
		return self.toImage().toPGM(path)

	@classmethod
	def fromPGM(cls, path:Union[str, os.PathLike]) -> BinaryImage:
		return binarize(ImageGrid.fromPGM(path))

	def _uint8(self) -> np.ndarray:
		return self._values.astype(np.uint8)

class StructuringElement:
	'''
	A small boolean mask with an anchor (the origin of the Minkowski operations).

	:param mask: 2D boolean mask with at least one ``True`` cell
	:param anchor: ``(row, column)`` inside the mask; defaults to the centre
	'''
	def __init__(self, mask, anchor:Optional[Tuple[int, int]]=None):
		mask = np.array(mask, dtype=bool)
		if mask.ndim != 2 or not mask.any():
			raise ValueError("A structuring element needs a 2D mask with at least one true cell.")
		if anchor is None:
			anchor = (mask.shape[0] // 2, mask.shape[1] // 2)
		if not (0 <= anchor[0] < mask.shape[0] and 0 <= anchor[1] < mask.shape[1]):
			raise ValueError(f"Anchor {anchor} lies outside the {mask.shape} mask.")
		mask.setflags(write=False)
		self.mask = mask
		self.anchor = (int(anchor[0]), int(anchor[1]))

	def __repr__(self):
		return f"<{self.__class__.__name__} {self.mask.shape} anchor={self.anchor}>"

	@classmethod
	def cross(cls, size:int=3) -> StructuringElement:
		return cls(cv2.getStructuringElement(cv2.MORPH_CROSS, (size, size)))

	@classmethod
	def square(cls, size:int=3) -> StructuringElement:
		return cls(np.ones((size, size), dtype=bool))

	def reflected(self) -> StructuringElement:
		''' Point reflection through the anchor. '''
		h, w = self.mask.shape
		return StructuringElement(self.mask[::-1, ::-1], (h - 1 - self.anchor[0], w - 1 - self.anchor[1]))

	@property
	def containsAnchor(self) -> bool:
		return bool(self.mask[self.anchor])

	def _kernel(self) -> np.ndarray:
		return self.mask.astype(np.uint8)

	def _cvAnchor(self) -> Tuple[int, int]:
		return self.anchor[1], self.anchor[0] # OpenCV takes (x, y)

DEFAULT_ELEMENT = StructuringElement.cross(3)

def binarize(image:ImageGrid, threshold:float=0.5) -> BinaryImage:
	''' ``True`` where the pixel value is ≥ ``threshold``. '''
	if not 0 < threshold < 1:
		raise ValueError(f"threshold must lie in (0, 1); got {threshold}.")
	return BinaryImage(image.values >= threshold)

def complement(image:BinaryImage) -> BinaryImage:
	return BinaryImage(~image.values)

def reflect(se:StructuringElement) -> StructuringElement:
	return se.reflected()

def erode(image:BinaryImage, se:StructuringElement=DEFAULT_ELEMENT) -> BinaryImage:
	''' ``{p : p + b ∈ X for every b ∈ B}``, offsets ``b`` taken relative to the anchor. '''
	out = cv2.erode(image._uint8(), se._kernel(), anchor=se._cvAnchor(), iterations=1,
	                borderType=cv2.BORDER_CONSTANT, borderValue=0)
	return BinaryImage(out)

def dilate(image:BinaryImage, se:StructuringElement=DEFAULT_ELEMENT) -> BinaryImage:
	''' ``{x + b : x ∈ X, b ∈ B}``, offsets ``b`` taken relative to the anchor. '''
	# OpenCV's dilate takes the max over p + b; the Minkowski sum needs p − b
	flipped = se.reflected()
	out = cv2.dilate(image._uint8(), flipped._kernel(), anchor=flipped._cvAnchor(), iterations=1,
	                 borderType=cv2.BORDER_CONSTANT, borderValue=0)
	return BinaryImage(out)

def opening(image:BinaryImage, se:StructuringElement=DEFAULT_ELEMENT) -> BinaryImage:
	''' Erosion then dilation; removes white blobs smaller than ``se``. '''
	return dilate(erode(image, se), se)

def closing(image:BinaryImage, se:StructuringElement=DEFAULT_ELEMENT) -> BinaryImage:
	''' Dilation then erosion; fills black holes smaller than ``se``. '''
	return erode(dilate(image, se), se)

def _boundary(mask:np.ndarray) -> np.ndarray:
	''' Pixels of ``mask`` with a 4-neighbour outside it. '''
	inner = cv2.erode(mask.astype(np.uint8), StructuringElement.cross(3)._kernel(),
	                  borderType=cv2.BORDER_CONSTANT, borderValue=1)
	return mask & ~inner.astype(bool)

def ratio_preserving_clean(image:BinaryImage, se:StructuringElement=DEFAULT_ELEMENT,
                           tolerance_pct:float=DEFAULT_TOLERANCE_PCT) -> BinaryImage:
	'''
	Opening then closing, followed by restoration of the white-pixel proportion.

	If the white percentage drifted by more than ``tolerance_pct`` points, pixels
	of the class that grew are flipped back, boundary pixels first, nearest to the
	pixels the cleanup changed, ties broken by (row, column), until the drift is
	within tolerance or no candidates remain.

	:param tolerance_pct: allowed drift in percentage points (≥ 0); 100 disables restoration
	'''
	if tolerance_pct < 0:
		raise ValueError("tolerance_pct must be ≥ 0")
	original = image.values
	cleaned = closing(opening(image, se), se).values.copy()
	n = original.size
	target = original.sum()

	changed = cleaned != original
	if changed.any():
		source = np.where(changed, 0, 1).astype(np.uint8)
		distance = cv2.distanceTransform(source, cv2.DIST_L2, cv2.DIST_MASK_PRECISE)
	else:
		distance = np.zeros(original.shape, dtype=np.float32)
	rows, cols = np.indices(original.shape)

	while True:
		excess = int(cleaned.sum()) - int(target) # > 0: white grew
		allowed = int(np.floor(tolerance_pct / 100.0 * n + 1e-9))
		if abs(excess) <= allowed:
			break
		grown = cleaned if excess > 0 else ~cleaned
		candidates = _boundary(grown)
		if not candidates.any():
			candidates = grown
		if not candidates.any():
			break
		r, c = rows[candidates], cols[candidates]
		order = np.lexsort((c, r, distance[candidates]))
		flips = order[:abs(excess) - allowed]
		cleaned[r[flips], c[flips]] = excess < 0
	drift = 100.0 * abs(int(cleaned.sum()) - int(target)) / n
	if drift > tolerance_pct:
		logger.warning(f"white ratio could only be restored to within {drift:.2f} points (tolerance {tolerance_pct})")
	return BinaryImage(cleaned)

def wwr(pattern:FacadePattern) -> float:
	''' Window-to-wall ratio in percent. '''
	return pattern.wwr

def snap_to_grid(image:BinaryImage, columns:int=GRID_COLUMNS, rows:int=GRID_ROWS) -> FacadePattern:
	'''
	A cell is open when at least half of its pixel block is white.

	:raises GridDimensionError: if the image size is not a multiple of the grid
	'''
	h, w = image.shape
	if h % rows or w % columns:
		raise GridDimensionError(f"A {h}x{w} image cannot be split into {rows}x{columns} equal cells.")
	bh, bw = h // rows, w // columns
	means = image.values.reshape(rows, bh, columns, bw).mean(axis=(1, 3))
	return FacadePattern(means >= 0.5)

def postprocess_facade(image:ImageGrid, se:StructuringElement=DEFAULT_ELEMENT,
                       tolerance_pct:float=DEFAULT_TOLERANCE_PCT) -> FacadePattern:
	''' binarize → ratio-preserving clean → snap to the cell grid. '''
	return snap_to_grid(ratio_preserving_clean(binarize(image), se, tolerance_pct))
