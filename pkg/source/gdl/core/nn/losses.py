'''
Loss functions. Each returns the batch-mean scalar; the matching ``*_grad``
function returns the gradient of that mean with respect to the predictions.
Predictions are clipped to ``[1e-7, 1 − 1e-7]`` before taking logarithms.
'''

import numpy as np

from ..exc import ShapeMismatchError

CLIP = 1e-7

def _check(name:str, predicted:np.ndarray, target:np.ndarray):
	if predicted.shape != target.shape:
		raise ShapeMismatchError(f"{name}: predictions {predicted.shape} and targets {target.shape} differ in shape.")
	if predicted.ndim == 0 or predicted.shape[0] == 0:
		raise ShapeMismatchError(f"{name}: an empty batch has no mean loss.")

def loss_categorical_crossentropy(probs:np.ndarray, one_hot:np.ndarray) -> float:
	''' ``mean_n( −Σ_k t[n,k] · ln p[n,k] )`` '''
	_check("categorical cross-entropy", probs, one_hot)
	p = np.clip(probs, CLIP, 1 - CLIP)
	return float(-(one_hot * np.log(p)).sum(axis=-1).mean())

def categorical_crossentropy_grad(probs:np.ndarray, one_hot:np.ndarray) -> np.ndarray:
	_check("categorical cross-entropy", probs, one_hot)
	p = np.clip(probs, CLIP, 1 - CLIP)
	return (-one_hot / p / probs.shape[0]).astype(probs.dtype, copy=False)

def loss_binary_crossentropy(p:np.ndarray, target:np.ndarray) -> float:
	''' ``mean( −t · ln p − (1 − t) · ln(1 − p) )`` over all elements. '''
	_check("binary cross-entropy", p, target)
	q = np.clip(p, CLIP, 1 - CLIP)
	return float(-(target * np.log(q) + (1 - target) * np.log(1 - q)).mean())

def binary_crossentropy_grad(p:np.ndarray, target:np.ndarray) -> np.ndarray:
	_check("binary cross-entropy", p, target)
	q = np.clip(p, CLIP, 1 - CLIP)
	return ((q - target) / (q * (1 - q)) / p.size).astype(p.dtype, copy=False)

def one_hot(labels:np.ndarray, num_classes:int, dtype=np.float32) -> np.ndarray:
	labels = np.asarray(labels, dtype=np.int64)
	out = np.zeros((len(labels), num_classes), dtype=dtype)
	out[np.arange(len(labels)), labels] = 1
	return out

def accuracy(probs:np.ndarray, labels:np.ndarray) -> float:
	''' Fraction of rows whose argmax equals the label. '''
	if len(labels) == 0:
		return float("nan")
	return float(np.mean(np.argmax(probs, axis=-1) == labels))
