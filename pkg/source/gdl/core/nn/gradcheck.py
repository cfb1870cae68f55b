'''
Finite-difference verification of analytic layer gradients.
'''

from __future__ import annotations # remove in Python 3.10

from typing import Dict, Optional, Sequence

import numpy as np

from .layers import Layer, Embedding, Dropout, MaxPool2D, ReLU, LeakyReLU
from .network import Network
from .tensor import CHECK_DTYPE
from ..logger import gdl_logger as logger

EPSILON = 1e-5
SCALE_FLOOR = 1e-3

def relative_error(analytic:np.ndarray, numeric:np.ndarray) -> float:
	'''
	Largest element-wise relative error ``|a − n| / (|a| + |n|)``, or 0 when both vanish.

	Each denominator is at least :data:`SCALE_FLOOR` times the largest ``|a| + |n|``
	of the tensor, so entries that are zero up to rounding are measured
	against the tensor's scale instead of their own.
	'''
	analytic = np.asarray(analytic, dtype=np.float64)
	numeric = np.asarray(numeric, dtype=np.float64)
	magnitude = np.abs(analytic) + np.abs(numeric)
	if magnitude.size == 0 or magnitude.max() == 0:
		return 0.0
	denominator = np.maximum(magnitude, SCALE_FLOOR * magnitude.max())
	return float(np.max(np.abs(analytic - numeric) / denominator))

def _sample_input(layer:Layer, input_shape:Sequence[int], rng:np.random.Generator) -> np.ndarray:
	shape = (2,) + tuple(input_shape) if len(input_shape) > 0 else (2,)
	if isinstance(layer, (ReLU, LeakyReLU)):
		# stay away from the kink at zero
		return rng.uniform(0.1, 1.0, size=shape) * rng.choice([-1.0, 1.0], size=shape)
	if isinstance(layer, MaxPool2D):
		# distinct, well separated values so no window has a tie
		return (rng.permutation(int(np.prod(shape))).reshape(shape) * 0.1).astype(CHECK_DTYPE)
	return rng.normal(size=shape)

def gradient_errors(layer:Layer, input_shape:Sequence[int], seed:int=0, training:bool=True, epsilon:float=EPSILON) -> Dict[str, float]:
	'''
	Relative error between analytic and central-difference gradients for the
	layer input and every trainable parameter, under the scalar objective
	``L = Σ y · r`` with a fixed random ``r``.

	The layer is converted to 64-bit precision in place.

	:param layer: layer under test
	:param input_shape: per-sample input shape (a batch of two is used)
	:returns: mapping from "input" / parameter name to relative error
	'''
	rng = np.random.default_rng(seed)
	layer.astype(CHECK_DTYPE)
	if isinstance(layer, Embedding):
		x = rng.integers(0, layer.num_labels, size=4)
	else:
		x = _sample_input(layer, input_shape, rng).astype(CHECK_DTYPE)
	if isinstance(layer, Dropout):
		layer.freeze_mask = True
	if hasattr(layer, "update_statistics"):
		layer.update_statistics = False

	y = layer.forward(x, training=training)
	r = rng.normal(size=y.shape)
	objective = lambda: float(np.sum(layer.forward(x, training=training) * r))

	for p in layer.parameters():
		p.zeroGrad()
	dx = layer.backward(r)

	errors = {}
	if dx is not None:
		numeric = np.zeros_like(x)
		flat_x, flat_n = x.reshape(-1), numeric.reshape(-1)
		for i in range(flat_x.size):
			original = flat_x[i]
			flat_x[i] = original + epsilon
			plus = objective()
			flat_x[i] = original - epsilon
			minus = objective()
			flat_x[i] = original
			flat_n[i] = (plus - minus) / (2 * epsilon)
		errors["input"] = relative_error(dx, numeric)

	for p in layer.parameters():
		if not p.trainable:
			continue
		numeric = np.zeros_like(p.values)
		flat_p, flat_n = p.values.reshape(-1), numeric.reshape(-1)
		for i in range(flat_p.size):
			original = flat_p[i]
			flat_p[i] = original + epsilon
			plus = objective()
			flat_p[i] = original - epsilon
			minus = objective()
			flat_p[i] = original
			flat_n[i] = (plus - minus) / (2 * epsilon)
		errors[p.name] = relative_error(p.grad, numeric)
	layer._cache = None
	return errors

def finite_diff_check(layer, input_shape:Sequence[int], tolerance:float=1e-4, seed:int=0) -> float:
	'''
	Maximum relative gradient error of a layer (or a whole :class:`Network`) over its input and parameters.

	The tolerance only decides whether a warning is logged; the caller decides what to assert.
	'''
	if isinstance(layer, Network):
		worst = _network_check(layer, input_shape, seed)
		name = layer.name
	else:
		errors = gradient_errors(layer, input_shape, seed=seed)
		worst = max(errors.values()) if errors else 0.0
		name = layer.kind
	if worst > tolerance:
		logger.warning(f"gradient check of {name}: relative error {worst:.2e} exceeds {tolerance:.0e}")
	else:
		logger.debug(f"gradient check of {name}: relative error {worst:.2e}")
	return worst

def _network_check(net:Network, input_shape:Sequence[int], seed:int) -> float:
	rng = np.random.default_rng(seed)
	net.astype(CHECK_DTYPE)
	for d in net.dropoutLayers():
		d.freeze_mask = True
	x = rng.normal(size=(2,) + tuple(input_shape))
	y = net.forward(x, training=True, update_statistics=False)
	r = rng.normal(size=y.shape)
	objective = lambda: float(np.sum(net.forward(x, training=True, update_statistics=False) * r))
	net.zeroGrad()
	dx = net.backward(r)
	worst = 0.0
	for target, analytic in [(x, dx)] + [(p.values, p.grad) for p in net.parameters()]:
		numeric = np.zeros_like(target)
		flat, flat_n = target.reshape(-1), numeric.reshape(-1)
		for i in range(flat.size):
			original = flat[i]
			flat[i] = original + EPSILON
			plus = objective()
			flat[i] = original - EPSILON
			minus = objective()
			flat[i] = original
			flat_n[i] = (plus - minus) / (2 * EPSILON)
		worst = max(worst, relative_error(analytic, numeric))
	return worst
