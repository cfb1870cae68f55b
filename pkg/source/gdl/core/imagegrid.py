from __future__ import annotations # remove in Python 3.10
# Needed for forward references, see:
# https://stackoverflow.com/a/33533514/2712652

import os
import pathlib
from typing import List, Sequence, Union

import numpy as np
from PIL import Image

from .exc import ShapeGeometryError, DatasetFormatError

DEFAULT_IMAGE_SIZE = 100

class ImageGrid:
	'''
	A grayscale raster with values in [0,1], stored row-major (``values[row, column]``).

	This is the sample representation shared by shape images and facade pattern images.
	Foreground is 1.0 (white), background 0.0 (black).

	:param values: a 2D array; copied and stored as 32-bit floats
	'''
	def __init__(self, values:np.ndarray):
		values = np.array(values, dtype=np.float32)
		if values.ndim != 2:
			raise ShapeGeometryError(f"An ImageGrid needs a 2D array; got shape {values.shape}.")
		if values.size and (not np.all(np.isfinite(values)) or values.min() < 0.0 or values.max() > 1.0):
			raise ShapeGeometryError("ImageGrid values must lie in [0,1].")
		values.setflags(write=False)
		self._values = values

	def __repr__(self):
		return f"<{self.__class__.__module__}.{self.__class__.__name__} object at {hex(id(self))} {self.height}x{self.width}>"

	def __eq__(self, other):
		if not isinstance(other, ImageGrid):
			return NotImplemented
		return self.shape == other.shape and np.array_equal(self._values, other._values)

	__hash__ = None

	@classmethod
	def blank(cls, height:int=DEFAULT_IMAGE_SIZE, width:int=DEFAULT_IMAGE_SIZE) -> ImageGrid:
		''' An all-background image. '''
		return cls(np.zeros((height, width), dtype=np.float32))

	@classmethod
	def fromClipped(cls, values:np.ndarray) -> ImageGrid:
		'''
		Build an image from arbitrary floats, clipping into [0,1] (e.g. after resampling).
		'''
		return cls(np.clip(np.asarray(values, dtype=np.float32), 0.0, 1.0))

	@property
	def values(self) -> np.ndarray:
		''' The read-only pixel array, shape ``(height, width)``. '''
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

	def foregroundCount(self, threshold:float=0.5) -> int:
		''' Number of pixels with value ≥ ``threshold``. '''
		return int(np.count_nonzero(self._values >= threshold))

	def toBytes(self) -> bytes:
		''' The 8-bit quantized pixels as written to PGM (value = round(pixel × 255)). '''
		return quantize(self._values).tobytes()

	def resized(self, height:int, width:int) -> ImageGrid:
		'''
		Resample to a new size. Shrinking uses area averaging (box filter), enlarging uses bilinear interpolation.
		'''
		if (height, width) == self.shape:
			return self
		if height <= self.height and width <= self.width:
			resample = Image.Resampling.BOX
		else:
			resample = Image.Resampling.BILINEAR
		image = Image.fromarray(np.ascontiguousarray(self._values, dtype=np.float32)) # mode 'F'
		resampled = np.asarray(image.resize((width, height), resample=resample), dtype=np.float32)
		return ImageGrid.fromClipped(resampled)

	def toPGM(self, path:Union[str, os.PathLike]) -> pathlib.Path:
		'''
		Write the image as a binary PGM (P5, maxval 255).

		:param path: the file to write, including the filename
		:returns: the path written
		'''
		path = pathlib.Path(path)
		write_pgm(quantize(self._values), path)
		return path

	@classmethod
	def fromPGM(cls, path:Union[str, os.PathLike]) -> ImageGrid:
		'''
		Read a PGM written by :meth:`toPGM` (or any 8-bit grayscale PGM).
		'''
		return cls(read_pgm(path).astype(np.float32) / 255.0)

def quantize(values:np.ndarray) -> np.ndarray:
	''' Map [0,1] floats to 8-bit gray levels. '''
	return np.rint(np.clip(values, 0.0, 1.0) * 255.0).astype(np.uint8)

def write_pgm(pixels:np.ndarray, path:pathlib.Path):
	'''
	Write an 8-bit 2D array as binary PGM with Pillow (mode 'L' is written as P5).
	'''
	if pixels.dtype != np.uint8 or pixels.ndim != 2:
		raise ValueError("write_pgm expects a 2D uint8 array.")
	path.parent.mkdir(parents=True, exist_ok=True)
	Image.fromarray(pixels).save(path, format="PPM")

def read_pgm(path:Union[str, os.PathLike]) -> np.ndarray:
	'''
	Read a PGM into an 8-bit 2D array.
	'''
	path = pathlib.Path(path)
	if not path.exists():
		raise FileNotFoundError(f"No image found at '{path}'.")
	with Image.open(path) as image:
		if image.mode != "L":
			raise DatasetFormatError(f"Expected an 8-bit grayscale PGM at '{path}'; found mode '{image.mode}'.")
		return np.array(image, dtype=np.uint8)

def mosaic(rows:Sequence[Sequence[ImageGrid]], gap:int=2) -> ImageGrid:
	'''
	Tile images into a contact sheet (one list per row), separated by ``gap`` pixels of 0.5 gray.

	All images must share one size.
	'''
	rows = [list(r) for r in rows if len(r) > 0]
	if len(rows) == 0:
		raise ValueError("A mosaic needs at least one image.")
	h, w = rows[0][0].shape
	n_cols = max(len(r) for r in rows)
	sheet = np.full((len(rows) * (h + gap) - gap, n_cols * (w + gap) - gap), 0.5, dtype=np.float32)
	for i, row in enumerate(rows):
		for j, image in enumerate(row):
			if image.shape != (h, w):
				raise ShapeGeometryError(f"Mosaic tiles must share one size; found {image.shape} and {(h, w)}.")
			sheet[i*(h+gap):i*(h+gap)+h, j*(w+gap):j*(w+gap)+w] = image.values
	return ImageGrid(sheet)

def stack(images:Sequence[ImageGrid]) -> np.ndarray:
	'''
	Stack images into a network input batch of shape ``(N, 1, H, W)``.
	'''
	if len(images) == 0:
		return np.zeros((0, 1, 0, 0), dtype=np.float32)
	return np.stack([im.values for im in images])[:, np.newaxis, :, :].astype(np.float32)
