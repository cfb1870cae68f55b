
from __future__ import annotations # remove in Python 3.10

import dataclasses
from typing import List, Sequence

import numpy as np

from .tensor import Tensor
from ..exc import ShapeMismatchError, TrainingHalted

@dataclasses.dataclass
class AdamState:
	'''
	Per-parameter moment estimates and the step count of an Adam optimizer.
	'''
	m: List[np.ndarray]
	v: List[np.ndarray]
	t: int = 0
	lr: float = 1e-3
	beta1: float = 0.9
	beta2: float = 0.999
	epsilon: float = 1e-8

	@classmethod
	def zeros(cls, params:Sequence[Tensor], **hyperparameters) -> AdamState:
		return cls(m=[np.zeros_like(p.values) for p in params], v=[np.zeros_like(p.values) for p in params], **hyperparameters)

def adam_update(params:Sequence[Tensor], grads:Sequence[np.ndarray], state:AdamState) -> AdamState:
	'''
	One Adam step with bias correction, applied in place to ``params``.

	:raises TrainingHalted: if any gradient holds a NaN or infinity; nothing is updated in that case
	'''
	if not (len(params) == len(grads) == len(state.m) == len(state.v)):
		raise ShapeMismatchError("Adam: parameter, gradient and moment lists differ in length.")
	for p, g, m in zip(params, grads, state.m):
		if g.shape != p.shape or m.shape != p.shape:
			raise ShapeMismatchError(f"Adam: gradient {g.shape} / moment {m.shape} do not match parameter '{p.name}' {p.shape}.")
	for p, g in zip(params, grads):
		if not np.all(np.isfinite(g)):
			raise TrainingHalted(f"Non-finite gradient in parameter '{p.name}' at optimizer step {state.t + 1}.", step=state.t + 1)

	state.t += 1
	b1, b2 = state.beta1, state.beta2
	correction1 = 1 - b1 ** state.t
	correction2 = 1 - b2 ** state.t
	for i, (p, g) in enumerate(zip(params, grads)):
		state.m[i] = b1 * state.m[i] + (1 - b1) * g
		state.v[i] = b2 * state.v[i] + (1 - b2) * g * g
		m_hat = state.m[i] / correction1
		v_hat = state.v[i] / correction2
		p.values = (p.values - state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon)).astype(p.dtype, copy=False)
	return state

class Adam:
	'''
	Adam optimizer over a fixed list of trainable tensors; reads their ``grad`` fields.

	:param params: the tensors to update, usually ``network.parameters()``
	'''
	def __init__(self, params:Sequence[Tensor], lr:float=1e-3, beta1:float=0.9, beta2:float=0.999, epsilon:float=1e-8):
		self.params = list(params)
		self.state = AdamState.zeros(self.params, lr=lr, beta1=beta1, beta2=beta2, epsilon=epsilon)

	def zeroGrad(self):
		for p in self.params:
			p.zeroGrad()

	def step(self):
		grads = [p.grad if p.grad is not None else np.zeros_like(p.values) for p in self.params]
		adam_update(self.params, grads, self.state)
