from __future__ import annotations # remove in Python 3.10

import os
import hashlib
import pathlib
from typing import Iterator, List, Sequence, Tuple, Union

import numpy as np
from astropy.table import Table

from .exc import InvalidLabel, DatasetFormatError, EmptyDataset
from .imagegrid import ImageGrid, stack
from .logger import gdl_logger as logger

MANIFEST_FILENAME = "manifest.csv"

class LabeledDataset:
	'''
	A list of (image, integer label) samples plus a per-sample manifest.

	The manifest is an :class:`astropy.table.Table` with one row per sample; it always
	has ``filename`` and ``label`` columns and may carry any others (e.g. ``seed``,
	``wwr_pct``). Labels in the manifest may be written either as integers or as
	label names; in memory they are always integers in ``range(len(label_names))``.

	:param samples: list of ``(ImageGrid, label)`` pairs
	:param manifest: a table with one row per sample
	:param label_names: names of the label space, index = integer label
	'''
	def __init__(self, samples:Sequence[Tuple[ImageGrid, int]], manifest:Table, label_names:Sequence[str]):
		self.label_names = tuple(label_names)
		self._samples = [(image, int(label)) for image, label in samples]
		if len(manifest) != len(self._samples):
			raise DatasetFormatError(f"The manifest has {len(manifest)} rows but the dataset has {len(self._samples)} samples.")
		for _, label in self._samples:
			if not 0 <= label < len(self.label_names):
				raise InvalidLabel(f"Label {label} is not valid for the label space {self.label_names}.")
		self.manifest = manifest

	def __repr__(self):
		return f"<{self.__class__.__module__}.{self.__class__.__name__} object at {hex(id(self))} n={len(self)} labels={self.label_names}>"

	def __len__(self) -> int:
		return len(self._samples)

	def __iter__(self) -> Iterator[Tuple[ImageGrid, int]]:
		return iter(self._samples)

	def __getitem__(self, index:int) -> Tuple[ImageGrid, int]:
		return self._samples[index]

	@property
	def samples(self) -> List[Tuple[ImageGrid, int]]:
		return list(self._samples)

	@property
	def images(self) -> List[ImageGrid]:
		return [image for image, _ in self._samples]

	@property
	def labels(self) -> np.ndarray:
		return np.array([label for _, label in self._samples], dtype=np.int64)

	@property
	def imageShape(self) -> tuple:
		''' The (height, width) shared by all samples. '''
		if len(self) == 0:
			raise EmptyDataset("An empty dataset has no image shape.")
		return self._samples[0][0].shape

	def labelCounts(self) -> np.ndarray:
		''' Number of samples per label, indexed by label. '''
		return np.bincount(self.labels, minlength=len(self.label_names))

	def asArrays(self) -> Tuple[np.ndarray, np.ndarray]:
		'''
		Return ``(x, y)`` with ``x`` of shape ``(N, 1, H, W)`` (float32) and integer labels ``y``.
		'''
		return stack(self.images), self.labels

	def subset(self, indices:Sequence[int]) -> LabeledDataset:
		''' A new dataset holding the given samples (and manifest rows) in the given order. '''
		indices = [int(i) for i in indices]
		manifest = self.manifest[indices] if len(indices) else self.manifest[:0]
		return LabeledDataset([self._samples[i] for i in indices], manifest, self.label_names)

	def withImages(self, images:Sequence[ImageGrid]) -> LabeledDataset:
		''' The same labels and manifest with replaced images (e.g. after resampling). '''
		if len(images) != len(self):
			raise DatasetFormatError("Replacement images must match the sample count.")
		return LabeledDataset(list(zip(images, self.labels)), self.manifest.copy(), self.label_names)

	# persistence
	# -----------

	def save(self, path:Union[str, os.PathLike], label_as_name:bool=False) -> pathlib.Path:
		'''
		Write every image as PGM plus ``manifest.csv`` into the directory ``path``.

		:param path: output directory; created if needed
		:param label_as_name: write label names (e.g. 'A') instead of integers in the manifest
		:returns: path of the manifest written
		'''
		path = pathlib.Path(path)
		path.mkdir(parents=True, exist_ok=True)
		for (image, _), filename in zip(self._samples, self.manifest["filename"]):
			image.toPGM(path / str(filename))
		manifest = self.manifest.copy()
		if label_as_name:
			manifest["label"] = [self.label_names[label] for label in self.labels]
		else:
			manifest["label"] = self.labels
		manifest_path = path / MANIFEST_FILENAME
		manifest.write(manifest_path, format="ascii.csv", overwrite=True)
		logger.debug(f"wrote {len(self)} samples to '{path}'")
		return manifest_path

	@classmethod
	def load(cls, path:Union[str, os.PathLike], label_names:Sequence[str]) -> LabeledDataset:
		'''
		Read a dataset directory written by :meth:`save`.

		:param path: directory containing ``manifest.csv`` and the PGM files
		:param label_names: the label space of the dataset
		'''
		path = pathlib.Path(path)
		manifest_path = path / MANIFEST_FILENAME
		if not manifest_path.exists():
			raise DatasetFormatError(f"No manifest found at '{manifest_path}'.")
		if manifest_path.stat().st_size == 0:
			raise DatasetFormatError(f"The manifest at '{manifest_path}' is empty.")
		manifest = Table.read(manifest_path, format="ascii.csv")
		for column in ("filename", "label"):
			if column not in manifest.colnames:
				raise DatasetFormatError(f"The manifest at '{manifest_path}' has no '{column}' column.")

		label_names = tuple(label_names)
		labels = []
		for value in manifest["label"]:
			value = value.item() if hasattr(value, "item") else value
			if isinstance(value, str):
				if value not in label_names:
					raise InvalidLabel(f"Unknown label '{value}' in '{manifest_path}'.")
				labels.append(label_names.index(value))
			else:
				labels.append(int(value))

		samples = [(ImageGrid.fromPGM(path / str(f)), label) for f, label in zip(manifest["filename"], labels)]
		manifest["label"] = np.array(labels, dtype=np.int64)
		return cls(samples, manifest, label_names)

	def manifestDigest(self) -> str:
		'''
		SHA-256 over the manifest rows and the quantized image bytes; equal datasets give equal digests.
		'''
		sha = hashlib.sha256()
		sha.update(",".join(self.manifest.colnames).encode())
		for row in self.manifest:
			sha.update(",".join(str(v) for v in row).encode())
		for image, label in self._samples:
			sha.update(image.toBytes())
			sha.update(int(label).to_bytes(2, "little"))
		return sha.hexdigest()

def empty_manifest(columns:Sequence[str], dtypes:Sequence) -> Table:
	''' A zero-row manifest with the given columns. '''
	return Table(names=list(columns), dtype=list(dtypes))

def file_sha256(path:Union[str, os.PathLike]) -> str:
	''' SHA-256 of a file on disk, used in command summaries. '''
	sha = hashlib.sha256()
	with open(path, "rb") as f:
		for chunk in iter(lambda: f.read(1 << 16), b""):
			sha.update(chunk)
	return sha.hexdigest()
