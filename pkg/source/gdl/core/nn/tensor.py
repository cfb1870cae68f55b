
from __future__ import annotations # remove in Python 3.10

from typing import Optional

import numpy as np

DEFAULT_DTYPE = np.float32
CHECK_DTYPE = np.float64 # gradient checking precision

class Tensor:
	'''
	A named parameter array with an optional gradient of the same shape.

	Activations flowing between layers are plain numpy arrays; this class carries
	the values an optimizer updates and a checkpoint stores.

	:param values: initial values (copied)
	:param name: descriptive name, e.g. "conv2d.kernel"
	:param trainable: ``False`` for statistics such as batch norm running means
	'''
	def __init__(self, values, name:str="", trainable:bool=True, dtype=None):
		self.values = np.array(values, dtype=dtype or DEFAULT_DTYPE)
		self.name = name
		self.trainable = trainable
		self.grad: Optional[np.ndarray] = None

	def __repr__(self):
		return f"<{self.__class__.__name__} '{self.name}' shape={self.shape} dtype={self.dtype}>"

	@property
	def shape(self) -> tuple:
		return self.values.shape

	@property
	def size(self) -> int:
		return self.values.size

	@property
	def dtype(self):
		return self.values.dtype

	def zeroGrad(self):
		''' Reset the gradient to zeros. '''
		self.grad = np.zeros_like(self.values)

	def accumulate(self, grad:np.ndarray):
		''' Add a gradient contribution; gradients from several backward passes sum. '''
		if grad.shape != self.values.shape:
			raise ValueError(f"Gradient shape {grad.shape} does not match parameter '{self.name}' {self.shape}.")
		if self.grad is None:
			self.grad = np.zeros_like(self.values)
		self.grad += grad.astype(self.values.dtype, copy=False)

	def astype(self, dtype):
		''' Convert values (and gradient) in place to ``dtype``. '''
		self.values = self.values.astype(dtype)
		if self.grad is not None:
			self.grad = self.grad.astype(dtype)
