'''
The shape classifier: a two-block convolutional network trained on the
synthetic shape images and evaluated on validation and freehand sets.
'''

from __future__ import annotations # remove in Python 3.10

import os
import pathlib
import dataclasses
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from astropy.table import Table
from tqdm import tqdm

from .nn import (Network, Conv2D, MaxPool2D, Flatten, Dense, ReLU, LeakyReLU, Tanh, Sigmoid, Softmax,
                 Dropout, Adam, loss_categorical_crossentropy, categorical_crossentropy_grad, one_hot)
from .dataset import LabeledDataset
from .imagegrid import ImageGrid
from .shapegen import SHAPE_CLASS_NAMES
from .exc import EmptyDataset, InvalidLabel, ShapeMismatchError, TrainingHalted
from .utilities.seeds import derive_seed, rng_for
from .logger import gdl_logger as logger

ACTIVATIONS = {"relu": ReLU, "leaky_relu": LeakyReLU, "tanh": Tanh, "sigmoid": Sigmoid}

@dataclasses.dataclass(frozen=True)
class ConvBlock:
	filters: int
	kernel_size: int
	activation: str = "relu"
	pool: int = 2

@dataclasses.dataclass(frozen=True)
class CnnSpec:
	'''
	Architecture of the classifier.

	The default is conv(30, 5×5) → relu → maxpool 2×2 → conv(15, 3×3) → relu →
	maxpool 2×2 → flatten → dense(128) → relu → dropout(0.2) → dense(6) → softmax.
	'''
	input_shape: Tuple[int, int, int] = (1, 100, 100)
	conv_blocks: Tuple[ConvBlock, ...] = (ConvBlock(30, 5), ConvBlock(15, 3))
	dense_widths: Tuple[int, ...] = (128,)
	dropout: float = 0.2
	num_classes: int = len(SHAPE_CLASS_NAMES)

	def __post_init__(self):
		if self.num_classes != len(SHAPE_CLASS_NAMES):
			raise ShapeMismatchError(f"The classifier head must have {len(SHAPE_CLASS_NAMES)} outputs; got {self.num_classes}.")
		for block in self.conv_blocks:
			if block.activation not in ACTIVATIONS:
				raise ValueError(f"Unknown activation '{block.activation}'.")

@dataclasses.dataclass(frozen=True)
class TrainConfig:
	'''
	:param epochs: passes over the training split (≥ 1)
	:param batch_size: samples per optimizer step (≥ 1)
	:param validation_split: fraction of each class held out for validation, in (0, 1); 0.25 gives the 3:1 split
	:param seed: master seed for split, shuffling, initialization and dropout
	:param learning_rate: Adam step size
	'''
	epochs: int = 10
	batch_size: int = 20
	validation_split: float = 0.25
	seed: int = 0
	learning_rate: float = 1e-3

	def __post_init__(self):
		if self.epochs < 1:
			raise ValueError("epochs must be ≥ 1")
		if self.batch_size < 1:
			raise ValueError("batch_size must be ≥ 1")
		if not 0 < self.validation_split < 1:
			raise ValueError("validation_split must lie in (0, 1)")

@dataclasses.dataclass
class EpochRecord:
	epoch: int
	train_acc: float
	train_loss: float
	val_acc: float
	val_loss: float

HISTORY_COLUMNS = ("epoch", "train_acc", "train_loss", "val_acc", "val_loss")

@dataclasses.dataclass
class TrainHistory:
	'''
	One record per epoch, plus the epoch whose weights were kept.

	``degenerate`` is set when the stratified split could not place every
	class in both partitions (e.g. a single-class dataset).
	'''
	records: List[EpochRecord] = dataclasses.field(default_factory=list)
	best_epoch: Optional[int] = None
	degenerate: bool = False

	def __len__(self):
		return len(self.records)

	def column(self, name:str) -> np.ndarray:
		return np.array([getattr(r, name) for r in self.records])

	def toTable(self) -> Table:
		return Table(rows=[dataclasses.astuple(r) for r in self.records] or None, names=HISTORY_COLUMNS,
		             dtype=(np.int64, float, float, float, float))

	def write(self, path:Union[str, os.PathLike]) -> pathlib.Path:
		''' CSV with header ``epoch,train_acc,train_loss,val_acc,val_loss``. '''
		path = pathlib.Path(path)
		self.toTable().write(path, format="ascii.csv", overwrite=True)
		return path

@dataclasses.dataclass
class EvalReport:
	'''
	:param accuracy: trace / total of the confusion matrix
	:param mean_loss: mean categorical cross-entropy
	:param confusion: rows = true label, columns = predicted label
	'''
	accuracy: float
	mean_loss: float
	confusion: np.ndarray
	label_names: Tuple[str, ...] = SHAPE_CLASS_NAMES

	def confusionTable(self) -> Table:
		table = Table()
		table["true"] = list(self.label_names)
		for j, name in enumerate(self.label_names):
			table[name] = self.confusion[:, j]
		return table

	def writeConfusion(self, path:Union[str, os.PathLike]) -> pathlib.Path:
		path = pathlib.Path(path)
		self.confusionTable().write(path, format="ascii.csv", overwrite=True)
		return path

def build_cnn(spec:CnnSpec=CnnSpec(), seed:int=0) -> Network:
	'''
	Build the classifier network with seeded initialization.

	:raises ShapeMismatchError: if the blocks do not compose on ``spec.input_shape``
	'''
	rng = rng_for(seed, "cnn-init")
	layers = []
	channels = spec.input_shape[0]
	for block in spec.conv_blocks:
		init = "he" if block.activation in ("relu", "leaky_relu") else "glorot"
		layers.append(Conv2D(channels, block.filters, block.kernel_size, rng=rng, init=init))
		layers.append(ACTIVATIONS[block.activation]())
		if block.pool > 1:
			layers.append(MaxPool2D(block.pool))
		channels = block.filters
	layers.append(Flatten())

	# the flattened width depends on the spatial shapes, so compose what we have so far
	width = Network(layers, name="cnn").outputShape(spec.input_shape)[0]
	for i, units in enumerate(spec.dense_widths):
		layers += [Dense(width, units, rng=rng, init="he"), ReLU()]
		if spec.dropout > 0:
			layers.append(Dropout(spec.dropout, seed=derive_seed(seed, "cnn-dropout", i)))
		width = units
	layers += [Dense(width, spec.num_classes, rng=rng, init="glorot"), Softmax()]
	net = Network(layers, input_shape=spec.input_shape, name="cnn")
	logger.debug(f"built classifier:\n{net.summary()}")
	return net

def stratified_split(labels:np.ndarray, validation_fraction:float, seed:int) -> Tuple[np.ndarray, np.ndarray, bool]:
	'''
	Split sample indices so that each class contributes the same fraction to validation.

	Each class with ``n ≥ 2`` samples sends ``round(n · fraction)`` of them (at
	least one, at most ``n − 1``) to validation.

	:returns: ``(train indices, validation indices, degenerate)``; both index arrays sorted; ``degenerate`` is true when fewer than two classes are present or some class could not be split
	'''
	labels = np.asarray(labels)
	train, val = [], []
	degenerate = len(np.unique(labels)) < 2
	for c in np.unique(labels):
		members = np.flatnonzero(labels == c)
		members = rng_for(seed, "split", int(c)).permutation(members)
		if len(members) < 2:
			degenerate = True
			train.extend(members)
			continue
		n_val = int(min(max(round(len(members) * validation_fraction), 1), len(members) - 1))
		val.extend(members[:n_val])
		train.extend(members[n_val:])
	return np.sort(np.array(train, dtype=np.int64)), np.sort(np.array(val, dtype=np.int64)), degenerate

def predict_probabilities(net:Network, x:np.ndarray, batch_size:int=100) -> np.ndarray:
	''' Inference-mode class probabilities for a ``(N, 1, H, W)`` batch. '''
	if len(x) == 0:
		return np.zeros((0, net.outputShape(net.input_shape)[0]), dtype=np.float32)
	return np.concatenate([net.forward(x[i:i + batch_size], training=False) for i in range(0, len(x), batch_size)])

def _metrics(net:Network, x:np.ndarray, y:np.ndarray, num_classes:int) -> Tuple[float, float, np.ndarray]:
	probs = predict_probabilities(net, x)
	loss = loss_categorical_crossentropy(probs, one_hot(y, num_classes, dtype=probs.dtype))
	return float(np.mean(probs.argmax(axis=1) == y)), loss, probs

def train_classifier(dataset:LabeledDataset, cfg:TrainConfig=TrainConfig(), spec:Optional[CnnSpec]=None,
                     progress:bool=False) -> Tuple[Network, TrainHistory]:
	'''
	Train the classifier with Adam on categorical cross-entropy.

	The dataset is split 3:1 (by default) per class; the training split is
	reshuffled every epoch; after the last epoch the weights of the epoch with
	the best validation accuracy (ties: lower validation loss) are restored.

	:param dataset: labeled images, labels in 0..5
	:param cfg: training configuration
	:param spec: architecture; by default the standard one sized to the dataset images
	:param progress: show a progress bar
	:raises EmptyDataset: for an empty dataset
	:raises TrainingHalted: if the loss becomes non-finite
	'''
	if len(dataset) == 0:
		raise EmptyDataset("Cannot train a classifier on an empty dataset.")
	x, y = dataset.asArrays()
	num_classes = len(SHAPE_CLASS_NAMES)
	if y.min() < 0 or y.max() >= num_classes:
		raise InvalidLabel(f"Classifier labels must lie in 0..{num_classes - 1}.")
	if spec is None:
		spec = CnnSpec(input_shape=(1,) + dataset.imageShape)

	net = build_cnn(spec, seed=derive_seed(cfg.seed, "cnn"))
	optimizer = Adam(net.parameters(), lr=cfg.learning_rate)

	train_idx, val_idx, degenerate = stratified_split(y, cfg.validation_split, derive_seed(cfg.seed, "split"))
	history = TrainHistory(degenerate=degenerate)
	if degenerate:
		logger.warning("stratified split is degenerate (a class has fewer than two samples or only one class is present)")
	if len(val_idx) == 0:
		logger.warning("validation split is empty; validation metrics are computed on the training split")
	x_train, y_train = x[train_idx], y[train_idx]
	x_val, y_val = (x[val_idx], y[val_idx]) if len(val_idx) else (x_train, y_train)
	logger.info(f"training classifier on {len(train_idx)} images, validating on {len(val_idx)} ({cfg.epochs} epochs, batch size {cfg.batch_size})")

	best_state, best_key = None, None
	step = 0
	for epoch in range(1, cfg.epochs + 1):
		order = rng_for(cfg.seed, "shuffle", epoch).permutation(len(train_idx))
		correct, loss_sum = 0, 0.0
		batches = range(0, len(order), cfg.batch_size)
		for start in tqdm(batches, desc=f"epoch {epoch}", disable=not progress, leave=False):
			batch = order[start:start + cfg.batch_size]
			xb, yb = x_train[batch], y_train[batch]
			target = one_hot(yb, num_classes)

			probs = net.forward(xb, training=True)
			loss = loss_categorical_crossentropy(probs, target)
			step += 1
			if not np.isfinite(loss):
				raise TrainingHalted(f"Classifier loss became non-finite at epoch {epoch}, step {step}.", step=step)
			optimizer.zeroGrad()
			net.backward(categorical_crossentropy_grad(probs, target))
			optimizer.step()

			correct += int(np.sum(probs.argmax(axis=1) == yb))
			loss_sum += loss * len(batch)

		val_acc, val_loss, _ = _metrics(net, x_val, y_val, num_classes)
		record = EpochRecord(epoch, correct / len(order), loss_sum / len(order), val_acc, val_loss)
		history.records.append(record)
		logger.info(f"epoch {epoch:3d}: train acc {record.train_acc:.4f} loss {record.train_loss:.4f} | val acc {val_acc:.4f} loss {val_loss:.4f}")

		key = (val_acc, -val_loss)
		if best_key is None or key > best_key:
			best_key, best_state, history.best_epoch = key, net.state(), epoch

	net.restore(best_state)
	logger.info(f"kept weights of epoch {history.best_epoch} (val acc {best_key[0]:.4f})")
	return net, history

def predict(net:Network, image:ImageGrid) -> Tuple[int, np.ndarray]:
	'''
	Classify one image in inference mode.

	:returns: ``(label, probability vector)``
	:raises ShapeMismatchError: if the image size differs from the network input
	'''
	expected = net.input_shape[1:] if net.input_shape else None
	if expected is not None and image.shape != tuple(expected):
		raise ShapeMismatchError(f"Image of size {image.shape} does not match the network input {tuple(expected)}.")
	probs = net.forward(image.values[None, None, :, :], training=False)[0]
	return int(np.argmax(probs)), probs

def confusion_matrix(true:Sequence[int], predicted:Sequence[int], num_classes:int) -> np.ndarray:
	''' Rows = true label, columns = predicted label. '''
	matrix = np.zeros((num_classes, num_classes), dtype=np.int64)
	np.add.at(matrix, (np.asarray(true, dtype=np.int64), np.asarray(predicted, dtype=np.int64)), 1)
	return matrix

def evaluate(net:Network, dataset:LabeledDataset) -> EvalReport:
	'''
	Accuracy, mean loss and confusion matrix of ``net`` on ``dataset``.

	:raises EmptyDataset: for an empty dataset
	'''
	if len(dataset) == 0:
		raise EmptyDataset("Cannot evaluate on an empty dataset.")
	x, y = dataset.asArrays()
	num_classes = len(SHAPE_CLASS_NAMES)
	accuracy, loss, probs = _metrics(net, x, y, num_classes)
	matrix = confusion_matrix(y, probs.argmax(axis=1), num_classes)
	return EvalReport(accuracy=float(np.trace(matrix) / matrix.sum()), mean_loss=loss, confusion=matrix)
