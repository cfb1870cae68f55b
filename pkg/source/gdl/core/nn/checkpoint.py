'''
Binary ``GDL1`` checkpoint files.

Layout (all integers little-endian)::

    b"GDL1"                      magic
    uint32                        format version
    uint32                        layer count
    per layer:
        uint16                    kind tag (see KIND_TAGS)
        uint16                    parameter count
        per parameter:
            uint8                 rank
            uint32 × rank         dimensions
            float32 × size        values, row-major

Parameter-free layers are stored with a parameter count of zero so the
loader can check the whole layer sequence.
'''

from __future__ import annotations # remove in Python 3.10

import io
import os
import struct
import pathlib
from typing import Union

import numpy as np

from ..exc import CheckpointFormatError
from ..logger import gdl_logger as logger

MAGIC = b"GDL1"
FORMAT_VERSION = 1

KIND_TAGS = {
	"conv2d": 1,
	"conv2d_transpose": 2,
	"dense": 3,
	"max_pool2d": 4,
	"upsample_nearest": 5,
	"flatten": 6,
	"reshape": 7,
	"relu": 8,
	"leaky_relu": 9,
	"tanh": 10,
	"sigmoid": 11,
	"softmax": 12,
	"dropout": 13,
	"batch_norm": 14,
	"embedding": 15,
}
KIND_NAMES = {tag: kind for kind, tag in KIND_TAGS.items()}

def checkpoint_bytes(model) -> bytes:
	'''
	Serialize every parameter (statistics included) of ``model``, an object with a ``layers`` list.
	'''
	out = io.BytesIO()
	out.write(MAGIC)
	out.write(struct.pack("<II", FORMAT_VERSION, len(model.layers)))
	for layer in model.layers:
		params = layer.parameters()
		out.write(struct.pack("<HH", KIND_TAGS[layer.kind], len(params)))
		for p in params:
			out.write(struct.pack("<B", p.values.ndim))
			out.write(struct.pack(f"<{p.values.ndim}I", *p.values.shape))
			out.write(np.ascontiguousarray(p.values, dtype="<f4").tobytes())
	return out.getvalue()

def save_checkpoint(model, path:Union[str, os.PathLike]) -> pathlib.Path:
	''' Write ``model`` to ``path`` in ``GDL1`` format. '''
	path = pathlib.Path(path)
	path.parent.mkdir(parents=True, exist_ok=True)
	path.write_bytes(checkpoint_bytes(model))
	logger.debug(f"checkpoint written to '{path}'")
	return path

class _Reader:
	def __init__(self, data:bytes, source:str):
		self.data, self.offset, self.source = data, 0, source

	def read(self, fmt:str):
		size = struct.calcsize(fmt)
		if self.offset + size > len(self.data):
			raise CheckpointFormatError(f"'{self.source}' is truncated at byte {self.offset}.")
		values = struct.unpack_from(fmt, self.data, self.offset)
		self.offset += size
		return values

	def readArray(self, shape:tuple) -> np.ndarray:
		count = int(np.prod(shape))
		if self.offset + 4 * count > len(self.data):
			raise CheckpointFormatError(f"'{self.source}' is truncated at byte {self.offset}.")
		values = np.frombuffer(self.data, dtype="<f4", count=count, offset=self.offset).reshape(shape)
		self.offset += 4 * count
		return values

def load_checkpoint(model, path:Union[str, os.PathLike]):
	'''
	Fill the parameters of an already built ``model`` from a ``GDL1`` file.

	The file must describe exactly the same layer sequence and parameter shapes.
	Values are cast to each parameter's current dtype. Returns ``model``.

	:raises CheckpointFormatError: on a bad magic, unknown version, or any layer or shape mismatch
	'''
	path = pathlib.Path(path)
	reader = _Reader(path.read_bytes(), str(path))
	if reader.data[:4] != MAGIC:
		raise CheckpointFormatError(f"'{path}' is not a GDL1 checkpoint (magic {reader.data[:4]!r}).")
	reader.offset = 4
	version, layer_count = reader.read("<II")
	if version != FORMAT_VERSION:
		raise CheckpointFormatError(f"'{path}' has format version {version}; only version {FORMAT_VERSION} is supported.")
	if layer_count != len(model.layers):
		raise CheckpointFormatError(f"'{path}' holds {layer_count} layers; the model has {len(model.layers)}.")

	loaded = []
	for i, layer in enumerate(model.layers):
		tag, param_count = reader.read("<HH")
		kind = KIND_NAMES.get(tag, f"<unknown tag {tag}>")
		if kind != layer.kind:
			raise CheckpointFormatError(f"'{path}' layer {i} is '{kind}'; the model has '{layer.kind}'.")
		params = layer.parameters()
		if param_count != len(params):
			raise CheckpointFormatError(f"'{path}' layer {i} ({kind}) has {param_count} parameters; expected {len(params)}.")
		for p in params:
			(rank,) = reader.read("<B")
			shape = reader.read(f"<{rank}I")
			if tuple(shape) != p.shape:
				raise CheckpointFormatError(f"'{path}' layer {i} ({kind}) parameter '{p.name}' has shape {tuple(shape)}; expected {p.shape}.")
			loaded.append((p, reader.readArray(tuple(shape))))
	if reader.offset != len(reader.data):
		raise CheckpointFormatError(f"'{path}' has {len(reader.data) - reader.offset} trailing bytes.")

	# assign only once the whole file has validated
	for p, values in loaded:
		p.values = values.astype(p.dtype)
	logger.debug(f"checkpoint loaded from '{path}'")
	return model
