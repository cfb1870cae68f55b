'''
Auxiliary-classifier GAN: a label-conditioned generator and a discriminator
with a validity head and a class head.

The generator works internally on images in [−1, 1] (tanh output); the
public :func:`generate` maps them to [0, 1] :class:`ImageGrid` objects.
'''

from __future__ import annotations # remove in Python 3.10

import os
import json
import pathlib
import dataclasses
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from astropy.table import Table
from tqdm import tqdm

from .nn import (Network, Embedding, Dense, Reshape, UpsampleNearest, Conv2D, BatchNorm, LeakyReLU, Tanh,
                 Dropout, Flatten, Sigmoid, Softmax, Adam, one_hot, save_checkpoint, load_checkpoint,
                 loss_binary_crossentropy, binary_crossentropy_grad,
                 loss_categorical_crossentropy, categorical_crossentropy_grad)
from .dataset import LabeledDataset
from .imagegrid import ImageGrid, mosaic, stack
from .shapegen import SHAPE_CLASS_NAMES
from .exc import EmptyDataset, InvalidLabel, ShapeMismatchError, TrainingHalted, UntrainedModelError
from .utilities.seeds import derive_seed, rng_for
from .logger import gdl_logger as logger

GENERATOR_FILENAME = "generator.gdl"
DISCRIMINATOR_FILENAME = "discriminator.gdl"
SPEC_FILENAME = "gan_spec.json"
HISTORY_FILENAME = "history.csv"
GAN_HISTORY_COLUMNS = ("step", "d_loss", "g_loss", "d_acc_real", "d_acc_fake")

@dataclasses.dataclass(frozen=True)
class GanSpec:
	'''
	Architecture of both networks.

	:param latent_dim: length of the latent vector (and of the class embedding)
	:param label_names: the label space; its length is the class count (≥ 2)
	:param image_shape: ``(H, W)``; both must be divisible by 4 (two 2× upsampling stages)
	:param generator_channels: channels of the base feature map and of the two upsampling blocks
	:param discriminator_channels: channels of the three stride-2 blocks
	:param dropout: discriminator dropout rate
	:param alpha: leaky ReLU slope
	'''
	latent_dim: int = 100
	label_names: Tuple[str, ...] = SHAPE_CLASS_NAMES
	image_shape: Tuple[int, int] = (64, 64)
	generator_channels: Tuple[int, int, int] = (64, 32, 16)
	discriminator_channels: Tuple[int, int, int] = (16, 32, 64)
	dropout: float = 0.25
	alpha: float = 0.2

	def __post_init__(self):
		if len(self.label_names) < 2:
			raise ValueError("An AC-GAN needs at least two classes.")
		h, w = self.image_shape
		if h % 4 or w % 4 or h < 4 or w < 4:
			raise ShapeMismatchError(f"Two 2x upsampling stages cannot reach {h}x{w}; both sides must be multiples of 4.")
		if self.latent_dim < 1:
			raise ValueError("latent_dim must be ≥ 1")

	@property
	def num_classes(self) -> int:
		return len(self.label_names)

	def toDict(self) -> dict:
		return {k: list(v) if isinstance(v, tuple) else v for k, v in dataclasses.asdict(self).items()}

	@classmethod
	def fromDict(cls, d:dict) -> GanSpec:
		return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in d.items()})

@dataclasses.dataclass(frozen=True)
class GanTrainConfig:
	'''
	:param steps: generator update steps (≥ 1)
	:param batch_size: images per batch (≥ 1)
	:param seed: master seed
	:param learning_rate: Adam step size for both networks
	:param beta1: Adam first-moment decay
	:param snapshot_interval: steps between label-grid snapshots and last-good checkpoints
	:param snapshot_samples: samples per label in a snapshot grid
	:param real_label: smoothed validity target of real images
	'''
	steps: int = 5000
	batch_size: int = 32
	seed: int = 0
	learning_rate: float = 2e-4
	beta1: float = 0.5
	snapshot_interval: int = 250
	snapshot_samples: int = 8
	real_label: float = 0.9

	def __post_init__(self):
		if self.steps < 1:
			raise ValueError("steps must be ≥ 1")
		if self.batch_size < 1:
			raise ValueError("batch_size must be ≥ 1")
		if self.snapshot_interval < 1:
			raise ValueError("snapshot_interval must be ≥ 1")

@dataclasses.dataclass
class GanStepRecord:
	step: int
	d_loss: float
	g_loss: float
	d_acc_real: float
	d_acc_fake: float

@dataclasses.dataclass
class GanHistory:
	records: List[GanStepRecord] = dataclasses.field(default_factory=list)

	def __len__(self):
		return len(self.records)

	def column(self, name:str) -> np.ndarray:
		return np.array([getattr(r, name) for r in self.records])

	def toTable(self) -> Table:
		return Table(rows=[dataclasses.astuple(r) for r in self.records] or None, names=GAN_HISTORY_COLUMNS,
		             dtype=(np.int64, float, float, float, float))

	def write(self, path:Union[str, os.PathLike]) -> pathlib.Path:
		''' CSV with header ``step,d_loss,g_loss,d_acc_real,d_acc_fake``. '''
		path = pathlib.Path(path)
		self.toTable().write(path, format="ascii.csv", overwrite=True)
		return path

class ConditionalGenerator:
	'''
	Latent vector × learned class embedding (element-wise) → dense → low-resolution
	feature map → 2 × (upsample, conv, batch norm, leaky ReLU) → conv → tanh.

	``layers`` lists the embedding followed by the body, in checkpoint order.
	'''
	def __init__(self, spec:GanSpec, embedding:Embedding, body:Network):
		self.spec = spec
		self.embedding = embedding
		self.body = body
		self.trained = False
		self._latent = None

	def __repr__(self):
		return f"<{self.__class__.__name__} image_shape={self.spec.image_shape} classes={self.spec.num_classes} trained={self.trained}>"

	@property
	def layers(self):
		return [self.embedding] + self.body.layers

	def parameters(self, trainable_only:bool=True):
		return self.embedding.parameters() + self.body.parameters(trainable_only)

	def parameterDigest(self) -> str:
		return Network(self.layers, name="generator").parameterDigest()

	def zeroGrad(self):
		for p in self.parameters(trainable_only=False):
			p.zeroGrad()

	def state(self):
		return [p.values.copy() for p in self.parameters(trainable_only=False)]

	def restore(self, state):
		for p, values in zip(self.parameters(trainable_only=False), state):
			p.values = values.copy()

	def forward(self, latent:np.ndarray, labels:np.ndarray, training:bool=False, update_statistics:bool=True) -> np.ndarray:
		''' Images in [−1, 1] of shape ``(N, 1, H, W)``. '''
		if latent.ndim != 2 or latent.shape[1] != self.spec.latent_dim or len(latent) != len(labels):
			raise ShapeMismatchError(f"generator: latent batch {latent.shape} does not match latent_dim {self.spec.latent_dim} and {len(labels)} labels.")
		e = self.embedding.forward(np.asarray(labels, dtype=np.int64), training=training)
		self._latent = latent
		return self.body.forward((latent * e).astype(self.body.dtype, copy=False), training=training, update_statistics=update_statistics)

	def backward(self, grad:np.ndarray):
		dh = self.body.backward(grad)
		self.embedding.backward(dh * self._latent)

class TwoHeadDiscriminator:
	'''
	Shared trunk of stride-2 convolution blocks, then a validity head
	(1 unit, sigmoid) and a class head (softmax over the label space).
	'''
	def __init__(self, spec:GanSpec, trunk:Network, validity:Network, classes:Network):
		self.spec = spec
		self.trunk, self.validity, self.classes = trunk, validity, classes

	def __repr__(self):
		return f"<{self.__class__.__name__} image_shape={self.spec.image_shape} classes={self.spec.num_classes}>"

	@property
	def layers(self):
		return self.trunk.layers + self.validity.layers + self.classes.layers

	def parameters(self, trainable_only:bool=True):
		return self.trunk.parameters(trainable_only) + self.validity.parameters(trainable_only) + self.classes.parameters(trainable_only)

	def parameterDigest(self) -> str:
		return Network(self.layers, name="discriminator").parameterDigest()

	def zeroGrad(self):
		for p in self.parameters(trainable_only=False):
			p.zeroGrad()

	def state(self):
		return [p.values.copy() for p in self.parameters(trainable_only=False)]

	def restore(self, state):
		for p, values in zip(self.parameters(trainable_only=False), state):
			p.values = values.copy()

	def astype(self, dtype):
		for net in (self.trunk, self.validity, self.classes):
			net.astype(dtype)
		return self

	def forward(self, images:np.ndarray, training:bool=False) -> Tuple[np.ndarray, np.ndarray]:
		''' ``(validity (N, 1), class probabilities (N, K))`` for images in [−1, 1]. '''
		features = self.trunk.forward(images, training=training)
		return self.validity.forward(features, training=training), self.classes.forward(features, training=training)

	def backward(self, validity_grad:np.ndarray, class_grad:np.ndarray) -> np.ndarray:
		features_grad = self.validity.backward(validity_grad) + self.classes.backward(class_grad)
		return self.trunk.backward(features_grad)

def build_generator(spec:GanSpec=GanSpec(), seed:int=0) -> ConditionalGenerator:
	'''
	:raises ShapeMismatchError: if the upsampling stages cannot reach ``spec.image_shape``
	'''
	rng = rng_for(seed, "generator-init")
	h, w = spec.image_shape
	c0, c1, c2 = spec.generator_channels
	base = (c0, h // 4, w // 4)
	layers = [
		Dense(spec.latent_dim, int(np.prod(base)), rng=rng, init="glorot"),
		Reshape(base),
		UpsampleNearest(2), Conv2D(c0, c1, 3, padding=1, rng=rng), BatchNorm(c1), LeakyReLU(spec.alpha),
		UpsampleNearest(2), Conv2D(c1, c2, 3, padding=1, rng=rng), BatchNorm(c2), LeakyReLU(spec.alpha),
		Conv2D(c2, 1, 3, padding=1, rng=rng, init="glorot"), Tanh(),
	]
	body = Network(layers, input_shape=(spec.latent_dim,), name="generator")
	output = body.outputShape((spec.latent_dim,))
	if output != (1, h, w):
		raise ShapeMismatchError(f"generator output {output} does not match the image shape (1, {h}, {w}).")
	return ConditionalGenerator(spec, Embedding(spec.num_classes, spec.latent_dim, rng=rng), body)

def build_discriminator(spec:GanSpec=GanSpec(), seed:int=0) -> TwoHeadDiscriminator:
	rng = rng_for(seed, "discriminator-init")
	layers = []
	channels = 1
	for i, filters in enumerate(spec.discriminator_channels):
		layers += [Conv2D(channels, filters, 3, stride=2, padding=1, rng=rng),
		           LeakyReLU(spec.alpha),
		           Dropout(spec.dropout, seed=derive_seed(seed, "discriminator-dropout", i))]
		channels = filters
	layers.append(Flatten())
	input_shape = (1,) + tuple(spec.image_shape)
	trunk = Network(layers, input_shape=input_shape, name="discriminator")
	(features,) = trunk.outputShape(input_shape)
	validity = Network([Dense(features, 1, rng=rng, init="glorot"), Sigmoid()], input_shape=(features,), name="validity")
	classes = Network([Dense(features, spec.num_classes, rng=rng, init="glorot"), Softmax()], input_shape=(features,), name="classes")
	return TwoHeadDiscriminator(spec, trunk, validity, classes)

def _latents(rng:np.random.Generator, n:int, spec:GanSpec) -> np.ndarray:
	return rng.normal(size=(n, spec.latent_dim)).astype(np.float32)

def _label_index(spec:GanSpec, label) -> int:
	if isinstance(label, str):
		if label not in spec.label_names:
			raise InvalidLabel(f"Unknown label '{label}'; expected one of {spec.label_names}.")
		return spec.label_names.index(label)
	if not 0 <= int(label) < spec.num_classes:
		raise InvalidLabel(f"Label {label} is outside 0..{spec.num_classes - 1}.")
	return int(label)

def snapshot_grid(generator:ConditionalGenerator, latents:np.ndarray) -> ImageGrid:
	''' One row per label, one column per latent, all generated in inference mode. '''
	k, n = generator.spec.num_classes, len(latents)
	labels = np.repeat(np.arange(k), n)
	images = (generator.forward(np.tile(latents, (k, 1)), labels, training=False) + 1) / 2
	rows = [[ImageGrid.fromClipped(images[r * n + c, 0]) for c in range(n)] for r in range(k)]
	return mosaic(rows)

def save_gan(generator:ConditionalGenerator, discriminator:TwoHeadDiscriminator, directory:Union[str, os.PathLike],
             suffix:str="") -> pathlib.Path:
	''' Write both checkpoints and the spec JSON; returns the generator checkpoint path. '''
	directory = pathlib.Path(directory)
	directory.mkdir(parents=True, exist_ok=True)
	g_path = save_checkpoint(generator, directory / GENERATOR_FILENAME.replace(".gdl", f"{suffix}.gdl"))
	save_checkpoint(discriminator, directory / DISCRIMINATOR_FILENAME.replace(".gdl", f"{suffix}.gdl"))
	with open(directory / SPEC_FILENAME, "w") as f:
		json.dump(generator.spec.toDict(), f, indent=2, sort_keys=True)
	return g_path

def load_generator(checkpoint:Union[str, os.PathLike], spec:Optional[GanSpec]=None) -> ConditionalGenerator:
	'''
	Rebuild a generator and fill it from a ``GDL1`` checkpoint. The spec is read
	from ``gan_spec.json`` beside the checkpoint when not given.
	'''
	checkpoint = pathlib.Path(checkpoint)
	if spec is None:
		spec_path = checkpoint.parent / SPEC_FILENAME
		with open(spec_path) as f:
			spec = GanSpec.fromDict(json.load(f))
	generator = build_generator(spec)
	load_checkpoint(generator, checkpoint)
	generator.trained = True
	return generator

def train_acgan(dataset:LabeledDataset, spec:GanSpec=GanSpec(), cfg:GanTrainConfig=GanTrainConfig(),
                output_dir:Optional[Union[str, os.PathLike]]=None, progress:bool=False
                ) -> Tuple[ConditionalGenerator, TwoHeadDiscriminator, GanHistory]:
	'''
	Adversarial training.

	Each step first updates the discriminator on a real batch (validity target
	``cfg.real_label``, true class) and a generated batch (validity 0,
	conditioning class) while the generator's batch statistics stay frozen; then
	updates the generator through the discriminator (validity 1, conditioning
	class) and discards the discriminator gradients. Both losses are binary plus
	categorical cross-entropy.

	When ``output_dir`` is given, label-grid snapshots and last-good checkpoints
	are written every ``cfg.snapshot_interval`` steps, and the final checkpoints
	and ``history.csv`` at the end.

	:raises EmptyDataset: for an empty dataset
	:raises TrainingHalted: on a non-finite loss or gradient; the networks are rolled back to the last good state
	'''
	if len(dataset) == 0:
		raise EmptyDataset("Cannot train an AC-GAN on an empty dataset.")
	x, y = dataset.asArrays()
	if y.max() >= spec.num_classes or y.min() < 0:
		raise InvalidLabel(f"Dataset labels must lie in 0..{spec.num_classes - 1}.")
	if x.shape[2:] != tuple(spec.image_shape):
		raise ShapeMismatchError(f"Dataset images are {x.shape[2:]}; the GAN expects {tuple(spec.image_shape)}.")
	real_images = x * 2 - 1
	output_dir = pathlib.Path(output_dir) if output_dir is not None else None

	generator = build_generator(spec, seed=derive_seed(cfg.seed, "generator"))
	discriminator = build_discriminator(spec, seed=derive_seed(cfg.seed, "discriminator"))
	g_optimizer = Adam(generator.parameters(), lr=cfg.learning_rate, beta1=cfg.beta1)
	d_optimizer = Adam(discriminator.parameters(), lr=cfg.learning_rate, beta1=cfg.beta1)

	rng = rng_for(cfg.seed, "acgan-train")
	snapshot_latents = _latents(rng_for(cfg.seed, "snapshot"), cfg.snapshot_samples, spec)
	batch_size = min(cfg.batch_size, len(dataset))
	k = spec.num_classes
	history = GanHistory()
	last_good = (generator.state(), discriminator.state(), None)
	logger.info(f"training AC-GAN on {len(dataset)} images {spec.image_shape} for {cfg.steps} steps (batch {batch_size})")

	def halt(message:str, step:int):
		generator.restore(last_good[0])
		discriminator.restore(last_good[1])
		checkpoint = last_good[2]
		logger.error(f"{message}; rolled back to the last good state" + (f" ('{checkpoint}')" if checkpoint else ""))
		error = TrainingHalted(message, step=step, checkpoint=checkpoint)
		error.rolled_back = True
		raise error

	for step in tqdm(range(1, cfg.steps + 1), desc="acgan", disable=not progress):
		try:
			# discriminator
			batch = rng.choice(len(dataset), size=batch_size, replace=False)
			real, real_labels = real_images[batch], y[batch]
			fake_labels = rng.integers(0, k, size=batch_size)
			fake = generator.forward(_latents(rng, batch_size, spec), fake_labels, training=True, update_statistics=False)

			discriminator.zeroGrad()
			v_real, c_real = discriminator.forward(real, training=True)
			t_real, oh_real = np.full_like(v_real, cfg.real_label), one_hot(real_labels, k, dtype=c_real.dtype)
			loss_real = loss_binary_crossentropy(v_real, t_real) + loss_categorical_crossentropy(c_real, oh_real)
			discriminator.backward(0.5 * binary_crossentropy_grad(v_real, t_real), 0.5 * categorical_crossentropy_grad(c_real, oh_real))

			v_fake, c_fake = discriminator.forward(fake, training=True)
			t_fake, oh_fake = np.zeros_like(v_fake), one_hot(fake_labels, k, dtype=c_fake.dtype)
			loss_fake = loss_binary_crossentropy(v_fake, t_fake) + loss_categorical_crossentropy(c_fake, oh_fake)
			discriminator.backward(0.5 * binary_crossentropy_grad(v_fake, t_fake), 0.5 * categorical_crossentropy_grad(c_fake, oh_fake))
			d_loss = 0.5 * (loss_real + loss_fake)
			if not np.isfinite(d_loss):
				halt(f"discriminator loss became non-finite at step {step}", step)
			d_optimizer.step()

			# generator, through the discriminator
			g_labels = rng.integers(0, k, size=batch_size)
			generator.zeroGrad()
			fake = generator.forward(_latents(rng, batch_size, spec), g_labels, training=True)
			v, c = discriminator.forward(fake, training=True)
			t_valid, oh = np.ones_like(v), one_hot(g_labels, k, dtype=c.dtype)
			g_loss = loss_binary_crossentropy(v, t_valid) + loss_categorical_crossentropy(c, oh)
			if not np.isfinite(g_loss):
				halt(f"generator loss became non-finite at step {step}", step)
			generator.backward(discriminator.backward(binary_crossentropy_grad(v, t_valid), categorical_crossentropy_grad(c, oh)))
			discriminator.zeroGrad()
			g_optimizer.step()
		except TrainingHalted as e:
			if not getattr(e, "rolled_back", False):
				# raised by an optimizer on a non-finite gradient
				halt(str(e), step)
			raise

		history.records.append(GanStepRecord(step, float(d_loss), float(g_loss),
		                                     float(np.mean(v_real > 0.5)), float(np.mean(v_fake < 0.5))))

		if step % cfg.snapshot_interval == 0 or step == cfg.steps:
			logger.info(f"step {step:6d}: d_loss {d_loss:.4f} g_loss {g_loss:.4f} "
			            f"d_acc_real {history.records[-1].d_acc_real:.2f} d_acc_fake {history.records[-1].d_acc_fake:.2f}")
			checkpoint = None
			if output_dir is not None:
				snapshot_grid(generator, snapshot_latents).toPGM(output_dir / "snapshots" / f"step_{step:06d}.pgm")
				checkpoint = save_gan(generator, discriminator, output_dir, suffix="_last_good")
			last_good = (generator.state(), discriminator.state(), checkpoint)

	generator.trained = True
	if output_dir is not None:
		save_gan(generator, discriminator, output_dir)
		history.write(output_dir / HISTORY_FILENAME)
	return generator, discriminator, history

def generate(generator:ConditionalGenerator, label, n:int, seed:int, allow_untrained:bool=False) -> List[ImageGrid]:
	'''
	``n`` images conditioned on ``label`` from seeded latent draws.

	The latents depend on ``seed`` only, so two labels with the same seed share latents.

	:param label: label index or label name
	:raises InvalidLabel: for a label outside the label space
	:raises UntrainedModelError: for a freshly built generator unless ``allow_untrained``
	'''
	index = _label_index(generator.spec, label)
	if not generator.trained and not allow_untrained:
		raise UntrainedModelError("This generator has not been trained or loaded from a checkpoint.")
	if n <= 0:
		return []
	latents = _latents(rng_for(seed, "generate"), n, generator.spec)
	images = (generator.forward(latents, np.full(n, index), training=False) + 1) / 2
	return [ImageGrid.fromClipped(images[i, 0]) for i in range(n)]

def label_fidelity(generator:ConditionalGenerator, oracle:Network, n_per_label:int, seed:int) -> Dict[str, float]:
	'''
	Per label, the fraction of generated images the oracle classifier assigns to the conditioning label.

	Generated images are resized to the oracle's input size first.
	'''
	from .classifier import predict_probabilities

	if n_per_label <= 0:
		return {}
	_, oh, ow = oracle.input_shape
	rates = {}
	for index, name in enumerate(generator.spec.label_names):
		images = generate(generator, index, n_per_label, derive_seed(seed, "fidelity", index), allow_untrained=True)
		x = stack([image.resized(oh, ow) if image.shape != (oh, ow) else image for image in images])
		rates[name] = float(np.mean(predict_probabilities(oracle, x).argmax(axis=1) == index))
	return rates

def novelty_check(generated:ImageGrid, dataset:LabeledDataset) -> float:
	'''
	Minimum mean-absolute pixel distance from ``generated`` to any dataset image.

	:raises EmptyDataset: for an empty dataset
	'''
	if len(dataset) == 0:
		raise EmptyDataset("Novelty needs at least one reference image.")
	if generated.shape != dataset.imageShape:
		raise ShapeMismatchError(f"Generated image {generated.shape} and dataset images {dataset.imageShape} differ in size.")
	x = stack(dataset.images)[:, 0]
	return float(np.abs(x - generated.values).mean(axis=(1, 2)).min())
