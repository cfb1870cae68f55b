
from __future__ import annotations # remove in Python 3.10

import hashlib
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .layers import Layer, BatchNorm, Dropout
from .tensor import Tensor, DEFAULT_DTYPE
from ..exc import ShapeMismatchError, BackwardBeforeForward

class Network:
	'''
	An ordered list of layers evaluated in sequence.

	The mode is chosen per call: ``forward(x, training=True)`` enables dropout
	and batch statistics, ``training=False`` (the default) is inference mode.

	:param layers: the layers, first to last
	:param input_shape: per-sample input shape (no batch axis); when given, the layer shapes are checked to compose
	:param name: name used in log messages
	'''
	def __init__(self, layers:Sequence[Layer], input_shape:Optional[Sequence[int]]=None, name:str="network"):
		self.layers: List[Layer] = list(layers)
		self.name = name
		self.input_shape = tuple(input_shape) if input_shape is not None else None
		self._forward_done = False

		seen = set()
		for p in self.parameters(trainable_only=False):
			if id(p) in seen:
				raise ValueError(f"Parameter '{p.name}' appears more than once in '{name}'.")
			seen.add(id(p))

		if self.input_shape is not None:
			self.outputShape(self.input_shape)

	def __repr__(self):
		return f"<{self.__class__.__name__} '{self.name}' layers={len(self.layers)} params={self.parameterCount()}>"

	def __len__(self):
		return len(self.layers)

	def parameters(self, trainable_only:bool=True) -> List[Tensor]:
		''' All parameter tensors in layer order; each appears exactly once. '''
		return [p for layer in self.layers for p in layer.parameters() if p.trainable or not trainable_only]

	def parameterCount(self) -> int:
		return int(sum(p.size for p in self.parameters()))

	def outputShape(self, input_shape:Sequence[int]) -> tuple:
		'''
		Compose the per-layer shape rules.

		:raises ShapeMismatchError: with a report of the shapes up to the failing layer
		'''
		shape = tuple(input_shape)
		report = [f"input {shape}"]
		for i, layer in enumerate(self.layers):
			try:
				shape = layer.outputShape(shape)
			except ShapeMismatchError as e:
				report.append(f"layer {i} ({layer.kind}): {e}")
				raise ShapeMismatchError(f"'{self.name}' does not compose:\n  " + "\n  ".join(report)) from e
			report.append(f"layer {i} ({layer.kind}) -> {shape}")
		return shape

	def summary(self) -> str:
		''' One line per layer with its output shape and parameter count. '''
		if self.input_shape is None:
			return "\n".join(f"{i:3d} {layer.kind}" for i, layer in enumerate(self.layers))
		lines = []
		shape = self.input_shape
		for i, layer in enumerate(self.layers):
			shape = layer.outputShape(shape)
			count = sum(p.size for p in layer.parameters() if p.trainable)
			lines.append(f"{i:3d} {layer.kind:<18s} {str(shape):<18s} {count:>9d}")
		lines.append(f"    total trainable parameters: {self.parameterCount()}")
		return "\n".join(lines)

	def forward(self, x:np.ndarray, training:bool=False, update_statistics:bool=True) -> np.ndarray:
		'''
		Evaluate the network on a batch.

		:param x: input batch
		:param training: training mode (dropout active, batch statistics)
		:param update_statistics: if ``False``, batch norm layers leave their running estimates untouched
		'''
		if self.input_shape is not None and tuple(x.shape[1:]) != self.input_shape:
			raise ShapeMismatchError(f"'{self.name}' expects samples of shape {self.input_shape}, got batch {x.shape}.")
		for layer in self.layers:
			if isinstance(layer, BatchNorm):
				layer.update_statistics = update_statistics
			x = layer.forward(x, training=training)
		self._forward_done = True
		return x

	__call__ = forward

	def backward(self, grad:np.ndarray) -> np.ndarray:
		'''
		Reverse-mode pass: accumulate every parameter gradient and return the gradient with respect to the input.

		:raises BackwardBeforeForward: if no forward pass has been cached
		'''
		if not self._forward_done:
			raise BackwardBeforeForward(f"'{self.name}': backward requires a preceding forward pass.")
		self._forward_done = False
		for layer in reversed(self.layers):
			grad = layer.backward(grad)
		return grad

	def zeroGrad(self):
		for p in self.parameters(trainable_only=False):
			p.zeroGrad()

	def astype(self, dtype) -> Network:
		''' Convert every parameter in place, e.g. to ``float64`` for gradient checks; returns ``self``. '''
		for layer in self.layers:
			layer.astype(dtype)
		return self

	@property
	def dtype(self):
		params = self.parameters(trainable_only=False)
		return params[0].dtype if params else np.dtype(DEFAULT_DTYPE)

	def parameterDigest(self) -> str:
		''' SHA-256 over every parameter's bytes (statistics included). '''
		sha = hashlib.sha256()
		for p in self.parameters(trainable_only=False):
			sha.update(np.ascontiguousarray(p.values).tobytes())
		return sha.hexdigest()

	def state(self) -> List[np.ndarray]:
		''' Copies of every parameter array, e.g. to restore a best-validation snapshot later. '''
		return [p.values.copy() for p in self.parameters(trainable_only=False)]

	def restore(self, state:List[np.ndarray]):
		params = self.parameters(trainable_only=False)
		if len(state) != len(params) or any(s.shape != p.shape for s, p in zip(state, params)):
			raise ShapeMismatchError(f"'{self.name}': snapshot does not match the parameters.")
		for p, values in zip(params, state):
			p.values = values.astype(p.dtype, copy=True)

	def dropoutLayers(self) -> List[Dropout]:
		return [layer for layer in self.layers if isinstance(layer, Dropout)]
