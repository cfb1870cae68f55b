'''
Layer vocabulary of the sequential network engine.

Every layer maps a batch array to a batch array. Shapes passed to
:meth:`Layer.outputShape` exclude the batch dimension. Image batches are laid
out as ``(N, C, H, W)``.
'''

from __future__ import annotations # remove in Python 3.10

from abc import ABC, abstractmethod
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .tensor import Tensor, DEFAULT_DTYPE
from ..exc import ShapeMismatchError, BackwardBeforeForward

def he_uniform(rng:np.random.Generator, shape:tuple, fan_in:int) -> np.ndarray:
	limit = np.sqrt(6.0 / fan_in)
	return rng.uniform(-limit, limit, size=shape)

def glorot_uniform(rng:np.random.Generator, shape:tuple, fan_in:int, fan_out:int) -> np.ndarray:
	limit = np.sqrt(6.0 / (fan_in + fan_out))
	return rng.uniform(-limit, limit, size=shape)

def _initial_weights(rng, shape, fan_in, fan_out, init):
	if rng is None:
		rng = np.random.default_rng(0)
	if init == "he":
		return he_uniform(rng, shape, fan_in)
	elif init == "glorot":
		return glorot_uniform(rng, shape, fan_in, fan_out)
	raise ValueError(f"Unknown initialization '{init}' (expected 'he' or 'glorot').")

def _pair(value) -> Tuple[int, int]:
	if isinstance(value, (tuple, list)):
		return int(value[0]), int(value[1])
	return int(value), int(value)

class Layer(ABC):
	'''
	Base class for all layers.

	Subclasses set ``kind`` (the checkpoint tag) and keep their learnable and
	statistic arrays as :class:`Tensor` objects in ``self.params``.
	'''
	kind = None

	def __init__(self):
		self.params: List[Tensor] = []
		self._cache = None

	def __repr__(self):
		return f"<{self.__class__.__name__} kind={self.kind}>"

	def parameters(self) -> List[Tensor]:
		return list(self.params)

	def outputShape(self, input_shape:tuple) -> tuple:
		return tuple(input_shape)

	@abstractmethod
	def forward(self, x:np.ndarray, training:bool=False) -> np.ndarray:
		pass

	@abstractmethod
	def backward(self, grad:np.ndarray) -> np.ndarray:
		'''
		Accumulate parameter gradients and return the gradient with respect to the layer input.
		'''
		pass

	def _popCache(self):
		if self._cache is None:
			raise BackwardBeforeForward(f"{self.kind}: backward called without a preceding forward pass.")
		cache, self._cache = self._cache, None
		return cache

	def astype(self, dtype):
		for p in self.params:
			p.astype(dtype)

	@property
	def dtype(self):
		return self.params[0].dtype if self.params else None

def _check_rank(kind:str, x:np.ndarray, rank:int):
	if x.ndim != rank:
		raise ShapeMismatchError(f"{kind}: expected a rank-{rank} batch, got input of shape {x.shape}.")

# parameterized layers
# --------------------

def conv2d_forward(x:np.ndarray, kernels:np.ndarray, bias:np.ndarray, stride:int=1, padding:int=0) -> np.ndarray:
	'''
	2D cross-correlation of an ``(N, C, H, W)`` batch with ``(F, C, kH, kW)`` kernels on the zero-padded input.

	:returns: ``(N, F, H', W')`` with ``H' = (H + 2·padding - kH) // stride + 1``
	'''
	return _conv2d(x, kernels, bias, stride, padding)[0]

def _conv2d(x, kernels, bias, stride, padding):
	''' Forward pass plus the padded shape and window view needed by the backward pass. '''
	if x.ndim != 4 or kernels.ndim != 4 or x.shape[1] != kernels.shape[1]:
		raise ShapeMismatchError(f"conv2d: input {x.shape} does not match kernels {kernels.shape}.")
	kh, kw = kernels.shape[2:]
	s, p = int(stride), int(padding)
	if x.shape[2] + 2 * p < kh or x.shape[3] + 2 * p < kw:
		raise ShapeMismatchError(f"conv2d: kernel {kh}x{kw} does not fit padded input {x.shape[2] + 2 * p}x{x.shape[3] + 2 * p}.")
	oh, ow = (x.shape[2] + 2 * p - kh) // s + 1, (x.shape[3] + 2 * p - kw) // s + 1
	xp = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p))) if p else x
	# (N, C, H', W', kH, kW) view, no copy
	windows = sliding_window_view(xp, (kh, kw), axis=(2, 3))[:, :, ::s, ::s][:, :, :oh, :ow]
	out = np.tensordot(windows, kernels, axes=([1, 4, 5], [1, 2, 3])) # (N, H', W', F)
	out = out.transpose(0, 3, 1, 2) + bias[None, :, None, None]
	return out.astype(x.dtype, copy=False), xp.shape, windows

class Conv2D(Layer):
	'''
	2D cross-correlation: ``y[n,f,i,j] = b[f] + Σ_c,u,v x[n,c,i·s+u,j·s+v] · k[f,c,u,v]`` on the zero-padded input.

	:param in_channels: input channel count ``C``
	:param filters: output channel count ``F``
	:param kernel_size: ``kH`` (and ``kW``) or a pair
	:param stride: step ≥ 1
	:param padding: zero padding on every side
	:param rng: generator used for initialization
	:param init: 'he' (ReLU-family) or 'glorot'
	'''
	kind = "conv2d"

	def __init__(self, in_channels:int, filters:int, kernel_size, stride:int=1, padding:int=0, rng=None, init:str="he"):
		super().__init__()
		kh, kw = _pair(kernel_size)
		if stride < 1:
			raise ValueError("stride must be ≥ 1")
		if padding < 0:
			raise ValueError("padding must be ≥ 0")
		self.in_channels, self.filters = in_channels, filters
		self.kernel_size, self.stride, self.padding = (kh, kw), int(stride), int(padding)
		fan_in, fan_out = in_channels * kh * kw, filters * kh * kw
		self.kernel = Tensor(_initial_weights(rng, (filters, in_channels, kh, kw), fan_in, fan_out, init), name=f"{self.kind}.kernel")
		self.bias = Tensor(np.zeros(filters), name=f"{self.kind}.bias")
		self.params = [self.kernel, self.bias]

	def outputShape(self, input_shape:tuple) -> tuple:
		if len(input_shape) != 3 or input_shape[0] != self.in_channels:
			raise ShapeMismatchError(f"{self.kind}: expected input (C={self.in_channels}, H, W), got {tuple(input_shape)}.")
		_, h, w = input_shape
		(kh, kw), s, p = self.kernel_size, self.stride, self.padding
		if h + 2 * p < kh or w + 2 * p < kw:
			raise ShapeMismatchError(f"{self.kind}: kernel {kh}x{kw} does not fit padded input {h + 2 * p}x{w + 2 * p}.")
		return self.filters, (h + 2 * p - kh) // s + 1, (w + 2 * p - kw) // s + 1

	def forward(self, x:np.ndarray, training:bool=False) -> np.ndarray:
		_check_rank(self.kind, x, 4)
		self.outputShape(x.shape[1:])
		out, xp_shape, windows = _conv2d(x, self.kernel.values, self.bias.values, self.stride, self.padding)
		self._cache = (xp_shape, windows)
		return out

	def backward(self, grad:np.ndarray) -> np.ndarray:
		xp_shape, windows = self._popCache()
		kernel = self.kernel.values
		self.kernel.accumulate(np.tensordot(grad, windows, axes=([0, 2, 3], [0, 2, 3])))
		self.bias.accumulate(grad.sum(axis=(0, 2, 3)))

		(kh, kw), s, p = self.kernel_size, self.stride, self.padding
		_, _, oh, ow = grad.shape
		dxp = np.zeros(xp_shape, dtype=grad.dtype)
		for u in range(kh):
			for v in range(kw):
				# every output pixel receives input (i·s+u, j·s+v) through kernel tap (u, v)
				dxp[:, :, u:u + s * oh:s, v:v + s * ow:s] += np.einsum("nfhw,fc->nchw", grad, kernel[:, :, u, v])
		if p:
			dxp = dxp[:, :, p:-p, p:-p]
		return dxp

class Conv2DTranspose(Layer):
	'''
	Transposed convolution, the adjoint of :class:`Conv2D` with the same stride and padding.

	Output size is ``(H − 1)·stride + k − 2·padding``.
	'''
	kind = "conv2d_transpose"

	def __init__(self, in_channels:int, filters:int, kernel_size, stride:int=1, padding:int=0, rng=None, init:str="he"):
		super().__init__()
		kh, kw = _pair(kernel_size)
		if stride < 1:
			raise ValueError("stride must be ≥ 1")
		self.in_channels, self.filters = in_channels, filters
		self.kernel_size, self.stride, self.padding = (kh, kw), int(stride), int(padding)
		fan_in, fan_out = in_channels * kh * kw, filters * kh * kw
		self.kernel = Tensor(_initial_weights(rng, (in_channels, filters, kh, kw), fan_in, fan_out, init), name=f"{self.kind}.kernel")
		self.bias = Tensor(np.zeros(filters), name=f"{self.kind}.bias")
		self.params = [self.kernel, self.bias]

	def outputShape(self, input_shape:tuple) -> tuple:
		if len(input_shape) != 3 or input_shape[0] != self.in_channels:
			raise ShapeMismatchError(f"{self.kind}: expected input (C={self.in_channels}, H, W), got {tuple(input_shape)}.")
		_, h, w = input_shape
		(kh, kw), s, p = self.kernel_size, self.stride, self.padding
		oh, ow = (h - 1) * s + kh - 2 * p, (w - 1) * s + kw - 2 * p
		if oh < 1 or ow < 1:
			raise ShapeMismatchError(f"{self.kind}: padding {p} leaves no output for input {h}x{w}.")
		return self.filters, oh, ow

	def forward(self, x:np.ndarray, training:bool=False) -> np.ndarray:
		_check_rank(self.kind, x, 4)
		_, oh, ow = self.outputShape(x.shape[1:])
		n, _, h, w = x.shape
		(kh, kw), s, p = self.kernel_size, self.stride, self.padding
		full = np.zeros((n, self.filters, (h - 1) * s + kh, (w - 1) * s + kw), dtype=x.dtype)
		for u in range(kh):
			for v in range(kw):
				full[:, :, u:u + s * h:s, v:v + s * w:s] += np.einsum("nchw,cf->nfhw", x, self.kernel.values[:, :, u, v])
		out = full[:, :, p:p + oh, p:p + ow] + self.bias.values[None, :, None, None]
		self._cache = x
		return out.astype(x.dtype, copy=False)

	def backward(self, grad:np.ndarray) -> np.ndarray:
		x = self._popCache()
		n, _, h, w = x.shape
		(kh, kw), s, p = self.kernel_size, self.stride, self.padding
		full = np.zeros((n, self.filters, (h - 1) * s + kh, (w - 1) * s + kw), dtype=grad.dtype)
		full[:, :, p:p + grad.shape[2], p:p + grad.shape[3]] = grad
		windows = sliding_window_view(full, self.kernel_size, axis=(2, 3))[:, :, ::s, ::s][:, :, :h, :w] # (N, F, H, W, kH, kW)
		self.kernel.accumulate(np.tensordot(x, windows, axes=([0, 2, 3], [0, 2, 3])))
		self.bias.accumulate(grad.sum(axis=(0, 2, 3)))
		dx = np.tensordot(windows, self.kernel.values, axes=([1, 4, 5], [1, 2, 3])) # (N, H, W, C)
		return dx.transpose(0, 3, 1, 2)

class Dense(Layer):
	'''
	Fully connected layer ``y = x·W + b`` on ``(N, in_features)`` batches.
	'''
	kind = "dense"

	def __init__(self, in_features:int, out_features:int, rng=None, init:str="he"):
		super().__init__()
		self.in_features, self.out_features = in_features, out_features
		self.weight = Tensor(_initial_weights(rng, (in_features, out_features), in_features, out_features, init), name=f"{self.kind}.weight")
		self.bias = Tensor(np.zeros(out_features), name=f"{self.kind}.bias")
		self.params = [self.weight, self.bias]

	def outputShape(self, input_shape:tuple) -> tuple:
		if tuple(input_shape) != (self.in_features,):
			raise ShapeMismatchError(f"{self.kind}: expected input ({self.in_features},), got {tuple(input_shape)}.")
		return (self.out_features,)

	def forward(self, x:np.ndarray, training:bool=False) -> np.ndarray:
		_check_rank(self.kind, x, 2)
		self.outputShape(x.shape[1:])
		self._cache = x
		return (x @ self.weight.values + self.bias.values).astype(x.dtype, copy=False)

	def backward(self, grad:np.ndarray) -> np.ndarray:
		x = self._popCache()
		self.weight.accumulate(x.T @ grad)
		self.bias.accumulate(grad.sum(axis=0))
		return grad @ self.weight.values.T

class Embedding(Layer):
	'''
	Lookup table mapping integer labels ``(N,)`` to vectors ``(N, dim)``.

	The input is discrete, so :meth:`backward` returns ``None``.
	'''
	kind = "embedding"

	def __init__(self, num_labels:int, dim:int, rng=None):
		super().__init__()
		self.num_labels, self.dim = num_labels, dim
		rng = np.random.default_rng(0) if rng is None else rng
		self.table = Tensor(rng.uniform(-0.05, 0.05, size=(num_labels, dim)) + 1.0, name=f"{self.kind}.table")
		self.params = [self.table]

	def outputShape(self, input_shape:tuple) -> tuple:
		return (self.dim,)

	def forward(self, labels:np.ndarray, training:bool=False) -> np.ndarray:
		labels = np.asarray(labels)
		if labels.ndim != 1 or not np.issubdtype(labels.dtype, np.integer):
			raise ShapeMismatchError(f"{self.kind}: expected a 1-D integer label batch, got {labels.shape} {labels.dtype}.")
		if labels.size and (labels.min() < 0 or labels.max() >= self.num_labels):
			raise ShapeMismatchError(f"{self.kind}: labels must lie in [0, {self.num_labels}).")
		self._cache = labels
		return self.table.values[labels]

	def backward(self, grad:np.ndarray) -> Optional[np.ndarray]:
		labels = self._popCache()
		table_grad = np.zeros_like(self.table.values)
		np.add.at(table_grad, labels, grad)
		self.table.accumulate(table_grad)
		return None

class BatchNorm(Layer):
	'''
	Batch normalization over every axis but the channel axis (axis 1); works for ``(N, C)`` and ``(N, C, H, W)``.

	In training mode the batch statistics normalize the input and, while
	``update_statistics`` is set, update the running estimates. In inference
	mode the running estimates are used.
	'''
	kind = "batch_norm"

	def __init__(self, channels:int, momentum:float=0.9, epsilon:float=1e-5):
		super().__init__()
		self.channels, self.momentum, self.epsilon = channels, momentum, epsilon
		self.gamma = Tensor(np.ones(channels), name=f"{self.kind}.gamma")
		self.beta = Tensor(np.zeros(channels), name=f"{self.kind}.beta")
		self.running_mean = Tensor(np.zeros(channels), name=f"{self.kind}.running_mean", trainable=False)
		self.running_var = Tensor(np.ones(channels), name=f"{self.kind}.running_var", trainable=False)
		self.params = [self.gamma, self.beta, self.running_mean, self.running_var]
		self.update_statistics = True

	def outputShape(self, input_shape:tuple) -> tuple:
		if len(input_shape) < 1 or input_shape[0] != self.channels:
			raise ShapeMismatchError(f"{self.kind}: expected {self.channels} channels, got input {tuple(input_shape)}.")
		return tuple(input_shape)

	def _broadcast(self, v:np.ndarray, ndim:int) -> np.ndarray:
		return v.reshape((1, -1) + (1,) * (ndim - 2))

	def forward(self, x:np.ndarray, training:bool=False) -> np.ndarray:
		self.outputShape(x.shape[1:])
		axes = (0,) + tuple(range(2, x.ndim))
		if training:
			mean = x.mean(axis=axes)
			var = x.var(axis=axes)
			if self.update_statistics:
				m = self.momentum
				self.running_mean.values = (m * self.running_mean.values + (1 - m) * mean).astype(self.running_mean.dtype)
				self.running_var.values = (m * self.running_var.values + (1 - m) * var).astype(self.running_var.dtype)
		else:
			mean, var = self.running_mean.values, self.running_var.values
		inv_std = 1.0 / np.sqrt(var + self.epsilon)
		x_hat = (x - self._broadcast(mean, x.ndim)) * self._broadcast(inv_std, x.ndim)
		self._cache = (x_hat, inv_std, training, axes)
		out = self._broadcast(self.gamma.values, x.ndim) * x_hat + self._broadcast(self.beta.values, x.ndim)
		return out.astype(x.dtype, copy=False)

	def backward(self, grad:np.ndarray) -> np.ndarray:
		x_hat, inv_std, training, axes = self._popCache()
		self.gamma.accumulate((grad * x_hat).sum(axis=axes))
		self.beta.accumulate(grad.sum(axis=axes))
		g_hat = grad * self._broadcast(self.gamma.values, grad.ndim)
		b = lambda v: self._broadcast(v, grad.ndim)
		if not training:
			return g_hat * b(inv_std)
		m = grad.size / grad.shape[1]
		return b(inv_std) / m * (m * g_hat - b(g_hat.sum(axis=axes)) - x_hat * b((g_hat * x_hat).sum(axis=axes)))

# parameter-free layers
# ---------------------

class MaxPool2D(Layer):
	'''
	Non-overlapping max pooling with window = stride = ``size``. Trailing rows/columns that do not fill a window are dropped.
	Ties route the gradient to the first maximum in row-major window order.
	'''
	kind = "max_pool2d"

	def __init__(self, size:int=2):
		super().__init__()
		self.size = int(size)

	def outputShape(self, input_shape:tuple) -> tuple:
		if len(input_shape) != 3:
			raise ShapeMismatchError(f"{self.kind}: expected (C, H, W), got {tuple(input_shape)}.")
		c, h, w = input_shape
		if h < self.size or w < self.size:
			raise ShapeMismatchError(f"{self.kind}: window {self.size} larger than input {h}x{w}.")
		return c, h // self.size, w // self.size

	def forward(self, x:np.ndarray, training:bool=False) -> np.ndarray:
		_check_rank(self.kind, x, 4)
		c, oh, ow = self.outputShape(x.shape[1:])
		n, k = x.shape[0], self.size
		blocks = x[:, :, :oh * k, :ow * k].reshape(n, c, oh, k, ow, k).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, oh, ow, k * k)
		argmax = blocks.argmax(axis=-1)
		self._cache = (x.shape, argmax)
		return np.take_along_axis(blocks, argmax[..., None], axis=-1)[..., 0]

	def backward(self, grad:np.ndarray) -> np.ndarray:
		shape, argmax = self._popCache()
		n, c, oh, ow = grad.shape
		k = self.size
		blocks = np.zeros((n, c, oh, ow, k * k), dtype=grad.dtype)
		np.put_along_axis(blocks, argmax[..., None], grad[..., None], axis=-1)
		dx = np.zeros(shape, dtype=grad.dtype)
		dx[:, :, :oh * k, :ow * k] = blocks.reshape(n, c, oh, ow, k, k).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, oh * k, ow * k)
		return dx

class UpsampleNearest(Layer):
	''' Repeat every pixel ``factor`` times along both spatial axes. '''
	kind = "upsample_nearest"

	def __init__(self, factor:int=2):
		super().__init__()
		self.factor = int(factor)

	def outputShape(self, input_shape:tuple) -> tuple:
		if len(input_shape) != 3:
			raise ShapeMismatchError(f"{self.kind}: expected (C, H, W), got {tuple(input_shape)}.")
		c, h, w = input_shape
		return c, h * self.factor, w * self.factor

	def forward(self, x:np.ndarray, training:bool=False) -> np.ndarray:
		_check_rank(self.kind, x, 4)
		self._cache = x.shape
		return x.repeat(self.factor, axis=2).repeat(self.factor, axis=3)

	def backward(self, grad:np.ndarray) -> np.ndarray:
		n, c, h, w = self._popCache()
		f = self.factor
		return grad.reshape(n, c, h, f, w, f).sum(axis=(3, 5))

class Flatten(Layer):
	kind = "flatten"

	def outputShape(self, input_shape:tuple) -> tuple:
		return (int(np.prod(input_shape)),)

	def forward(self, x:np.ndarray, training:bool=False) -> np.ndarray:
		self._cache = x.shape
		return x.reshape(x.shape[0], -1)

	def backward(self, grad:np.ndarray) -> np.ndarray:
		return grad.reshape(self._popCache())

class Reshape(Layer):
	''' Reshape each sample to ``target_shape`` (batch axis kept). '''
	kind = "reshape"

	def __init__(self, target_shape:Sequence[int]):
		super().__init__()
		self.target_shape = tuple(int(d) for d in target_shape)

	def outputShape(self, input_shape:tuple) -> tuple:
		if int(np.prod(input_shape)) != int(np.prod(self.target_shape)):
			raise ShapeMismatchError(f"{self.kind}: cannot reshape {tuple(input_shape)} to {self.target_shape}.")
		return self.target_shape

	def forward(self, x:np.ndarray, training:bool=False) -> np.ndarray:
		self.outputShape(x.shape[1:])
		self._cache = x.shape
		return x.reshape((x.shape[0],) + self.target_shape)

	def backward(self, grad:np.ndarray) -> np.ndarray:
		return grad.reshape(self._popCache())

class ReLU(Layer):
	kind = "relu"

	def forward(self, x:np.ndarray, training:bool=False) -> np.ndarray:
		self._cache = x > 0
		return np.where(self._cache, x, 0).astype(x.dtype, copy=False)

	def backward(self, grad:np.ndarray) -> np.ndarray:
		return grad * self._popCache()

class LeakyReLU(Layer):
	kind = "leaky_relu"

	def __init__(self, alpha:float=0.2):
		super().__init__()
		self.alpha = float(alpha)

	def forward(self, x:np.ndarray, training:bool=False) -> np.ndarray:
		self._cache = x > 0
		return np.where(self._cache, x, self.alpha * x).astype(x.dtype, copy=False)

	def backward(self, grad:np.ndarray) -> np.ndarray:
		return np.where(self._popCache(), grad, self.alpha * grad)

class Tanh(Layer):
	kind = "tanh"

	def forward(self, x:np.ndarray, training:bool=False) -> np.ndarray:
		y = np.tanh(x)
		self._cache = y
		return y

	def backward(self, grad:np.ndarray) -> np.ndarray:
		y = self._popCache()
		return grad * (1 - y * y)

class Sigmoid(Layer):
	kind = "sigmoid"

	def forward(self, x:np.ndarray, training:bool=False) -> np.ndarray:
		# split by sign to avoid overflow in exp
		y = np.empty_like(x)
		pos = x >= 0
		y[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
		ex = np.exp(x[~pos])
		y[~pos] = ex / (1.0 + ex)
		self._cache = y
		return y

	def backward(self, grad:np.ndarray) -> np.ndarray:
		y = self._popCache()
		return grad * y * (1 - y)

class Softmax(Layer):
	''' Softmax over the last axis. '''
	kind = "softmax"

	def forward(self, x:np.ndarray, training:bool=False) -> np.ndarray:
		e = np.exp(x - x.max(axis=-1, keepdims=True))
		s = e / e.sum(axis=-1, keepdims=True)
		self._cache = s
		return s

	def backward(self, grad:np.ndarray) -> np.ndarray:
		s = self._popCache()
		return s * (grad - (grad * s).sum(axis=-1, keepdims=True))

class Dropout(Layer):
	'''
	Inverted dropout: in training mode each activation is zeroed with probability ``rate``
	and survivors are scaled by ``1 / (1 − rate)``; inference mode is the identity.

	:param rate: drop probability in [0, 1)
	:param seed: seed of the layer's own mask stream
	'''
	kind = "dropout"

	def __init__(self, rate:float, seed:int=0):
		super().__init__()
		if not 0 <= rate < 1:
			raise ValueError(f"Dropout rate must be in [0, 1); got {rate}.")
		self.rate = float(rate)
		self.rng = np.random.default_rng(seed)
		self.freeze_mask = False # reuse the last mask (gradient checking)
		self._mask = None

	def forward(self, x:np.ndarray, training:bool=False) -> np.ndarray:
		if not training or self.rate == 0:
			self._cache = 1.0
			return x
		if not (self.freeze_mask and self._mask is not None and self._mask.shape == x.shape):
			self._mask = (self.rng.random(x.shape) >= self.rate).astype(x.dtype) / (1.0 - self.rate)
		self._cache = self._mask
		return x * self._mask

	def backward(self, grad:np.ndarray) -> np.ndarray:
		return grad * self._popCache()

LAYER_CLASSES = {cls.kind: cls for cls in (Conv2D, Conv2DTranspose, Dense, Embedding, BatchNorm, MaxPool2D,
                                          UpsampleNearest, Flatten, Reshape, ReLU, LeakyReLU, Tanh, Sigmoid,
                                          Softmax, Dropout)}
