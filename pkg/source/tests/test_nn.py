
import pytest
import numpy as np

from gdl.core.nn import (Tensor, conv2d_forward, Conv2D, Conv2DTranspose, Dense, Embedding, BatchNorm, MaxPool2D, UpsampleNearest,
                         Flatten, Reshape, ReLU, LeakyReLU, Tanh, Sigmoid, Softmax, Dropout, Network, Adam,
                         AdamState, adam_update, loss_categorical_crossentropy, categorical_crossentropy_grad,
                         loss_binary_crossentropy, binary_crossentropy_grad, one_hot, finite_diff_check,
                         gradient_errors, save_checkpoint, load_checkpoint)
from gdl.core.nn.checkpoint import MAGIC
from gdl.core.nn.gradcheck import relative_error
from gdl.core.exc import ShapeMismatchError, BackwardBeforeForward, TrainingHalted, CheckpointFormatError

def rng(seed=0):
	return np.random.default_rng(seed)

# layer, per-sample input shape
gradient_check_cases = [
	(Dense(8, 4, rng=rng(1)), (8,)),
	(Conv2D(1, 2, 3, rng=rng(2)), (1, 4, 4)),
	(Conv2D(2, 3, 3, stride=2, padding=1, rng=rng(3)), (2, 5, 5)),
	(Conv2DTranspose(2, 2, 3, stride=2, padding=1, rng=rng(4)), (2, 3, 3)),
	(Embedding(5, 6, rng=rng(5)), ()),
	(BatchNorm(3), (3, 4, 4)),
	(MaxPool2D(2), (2, 4, 4)),
	(UpsampleNearest(2), (2, 3, 3)),
	(Flatten(), (2, 3, 3)),
	(Reshape((3, 6)), (18,)),
	(ReLU(), (10,)),
	(LeakyReLU(0.2), (10,)),
	(Tanh(), (10,)),
	(Sigmoid(), (10,)),
	(Softmax(), (6,)),
	(Dropout(0.3, seed=1), (12,)),
]

@pytest.mark.parametrize("layer, input_shape", gradient_check_cases, ids=lambda v: getattr(v, "kind", None))
def test_gradient_check(layer, input_shape):
	'''
	Analytic gradients agree with central differences in 64-bit mode.
	'''
	assert finite_diff_check(layer, input_shape) < 1e-4

def test_leaky_relu_gradient_exact():
	errors = gradient_errors(LeakyReLU(0.2), (20,), seed=4)
	assert errors["input"] < 1e-6

def test_relative_error_reports_the_worst_element():
	analytic = np.ones(10000)
	numeric = analytic.copy()
	numeric[17] = 1.01
	# the norm ratio of this pair is about 5e-5
	assert relative_error(analytic, numeric) == pytest.approx(0.01 / 2.01)
	assert relative_error(np.zeros(5), np.zeros(5)) == 0.0
	# entries that vanish up to rounding are judged against the tensor's scale
	assert relative_error(np.array([1.0, 0.0]), np.array([1.0, 1e-12])) < 1e-6

def test_network_gradient_check():
	r = rng(7)
	net = Network([Conv2D(1, 2, 3, rng=r), BatchNorm(2), LeakyReLU(), MaxPool2D(2), Flatten(), Dense(8, 3, rng=r),
	               Softmax()], input_shape=(1, 6, 6))
	assert finite_diff_check(net, (1, 6, 6)) < 1e-4

def test_conv_identity_kernel():
	conv = Conv2D(1, 1, 3, padding=1)
	conv.kernel.values[...] = 0
	conv.kernel.values[0, 0, 1, 1] = 1
	x = rng().normal(size=(2, 1, 5, 5)).astype(np.float32)
	assert np.array_equal(conv.forward(x), x)

def test_conv_hand_example():
	conv = Conv2D(1, 1, 2)
	conv.kernel.values[...] = 1
	x = np.arange(1, 10, dtype=np.float32).reshape(1, 1, 3, 3)
	assert np.array_equal(conv.forward(x)[0, 0], [[12, 16], [24, 28]])

def test_conv_output_shape():
	conv = Conv2D(1, 30, 5, rng=rng())
	assert conv.outputShape((1, 100, 100)) == (30, 96, 96)
	assert conv.forward(np.zeros((1, 1, 100, 100), dtype=np.float32)).shape == (1, 30, 96, 96)

def test_conv_kernel_too_large():
	with pytest.raises(ShapeMismatchError):
		Conv2D(1, 2, 5).outputShape((1, 3, 3))
	with pytest.raises(ShapeMismatchError):
		conv2d_forward(np.zeros((1, 1, 3, 3)), np.zeros((2, 1, 5, 5)), np.zeros(2))

@pytest.mark.parametrize("stride,padding", [(1, 0), (2, 1), (3, 2)])
def test_conv2d_forward_matches_loops(stride, padding):
	x = rng(7).normal(size=(2, 3, 7, 6))
	k = rng(8).normal(size=(4, 3, 3, 2))
	b = rng(9).normal(size=4)
	out = conv2d_forward(x, k, b, stride=stride, padding=padding)
	xp = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
	oh, ow = (7 + 2 * padding - 3) // stride + 1, (6 + 2 * padding - 2) // stride + 1
	expected = np.empty((2, 4, oh, ow))
	for n in range(2):
		for f in range(4):
			for i in range(oh):
				for j in range(ow):
					patch = xp[n, :, i * stride:i * stride + 3, j * stride:j * stride + 2]
					expected[n, f, i, j] = b[f] + np.sum(patch * k[f])
	assert np.allclose(out, expected)

def test_network_shape_report():
	with pytest.raises(ShapeMismatchError, match="layer 1"):
		Network([Flatten(), Dense(10, 2)], input_shape=(1, 4, 4))

def test_network_shapes_compose():
	r = rng(3)
	net = Network([Conv2D(1, 4, 3, rng=r), ReLU(), MaxPool2D(2), Flatten(), Dense(144, 5, rng=r), Softmax()],
	              input_shape=(1, 14, 14))
	assert net.outputShape((1, 14, 14)) == (5,)
	assert net.forward(np.zeros((3, 1, 14, 14), dtype=np.float32)).shape == (3, 5)

def test_duplicate_parameters_rejected():
	dense = Dense(3, 3)
	with pytest.raises(ValueError):
		Network([dense, dense])

def test_backward_before_forward():
	net = Network([Dense(3, 2)])
	with pytest.raises(BackwardBeforeForward):
		net.backward(np.ones((1, 2), dtype=np.float32))
	with pytest.raises(BackwardBeforeForward):
		Dense(3, 2).backward(np.ones((1, 2)))

def test_zero_upstream_gradient():
	r = rng(2)
	net = Network([Dense(4, 3, rng=r), Tanh(), Dense(3, 2, rng=r)])
	net.forward(r.normal(size=(5, 4)).astype(np.float32), training=True)
	net.zeroGrad()
	net.backward(np.zeros((5, 2), dtype=np.float32))
	assert all(not p.grad.any() for p in net.parameters())

def test_softmax_crossentropy_gradient():
	'''
	Chaining the loss gradient through softmax gives probabilities − one-hot, over the batch size.
	'''
	softmax = Softmax()
	logits = rng(5).normal(size=(4, 6))
	probs = softmax.forward(logits)
	target = one_hot(np.array([0, 3, 5, 1]), 6, dtype=np.float64)
	grad = softmax.backward(categorical_crossentropy_grad(probs, target))
	assert np.allclose(grad, (probs - target) / 4, atol=1e-9)

def test_softmax_rows():
	probs = Softmax().forward(rng(1).normal(size=(10, 6)) * 20)
	assert np.all(probs >= 0)
	assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-6)

def test_max_pool_idempotent_on_constant_blocks():
	pool = MaxPool2D(2)
	pooled = pool.forward(rng(2).normal(size=(1, 2, 8, 8)))
	upsampled = UpsampleNearest(2).forward(pooled)
	assert np.array_equal(pool.forward(upsampled), pooled)

def test_max_pool_tie_goes_to_first():
	pool = MaxPool2D(2)
	pool.forward(np.ones((1, 1, 2, 2)))
	dx = pool.backward(np.ones((1, 1, 1, 1)))
	assert np.array_equal(dx[0, 0], [[1, 0], [0, 0]])

def test_dropout_modes():
	dropout = Dropout(0.5, seed=3)
	x = np.ones((4, 100), dtype=np.float32)
	assert np.array_equal(dropout.forward(x, training=False), x)
	y = dropout.forward(x, training=True)
	assert set(np.unique(y)) <= {0.0, 2.0}
	assert 0 < np.count_nonzero(y) < y.size

def test_batch_norm_statistics():
	bn = BatchNorm(2)
	x = rng(4).normal(loc=3.0, size=(64, 2))
	bn.forward(x, training=True)
	assert np.all(bn.running_mean.values > 0)
	before = bn.running_mean.values.copy()
	bn.update_statistics = False
	bn.forward(x, training=True)
	assert np.array_equal(bn.running_mean.values, before)

@pytest.mark.parametrize("loss, probs, target, expected", [
	(loss_categorical_crossentropy, np.full((3, 6), 1 / 6), one_hot(np.array([0, 2, 5]), 6), np.log(6)),
	(loss_categorical_crossentropy, one_hot(np.array([1, 4]), 6), one_hot(np.array([1, 4]), 6), 0.0),
	(loss_binary_crossentropy, np.full((4, 1), 0.5), np.full((4, 1), 0.5), np.log(2)),
])
def test_loss_values(loss, probs, target, expected):
	assert loss(probs, target) == pytest.approx(expected, abs=1e-6)

def test_loss_shape_mismatch():
	with pytest.raises(ShapeMismatchError):
		loss_binary_crossentropy(np.zeros((3, 1)), np.zeros((4, 1)))

def test_binary_crossentropy_gradient():
	p = rng(8).uniform(0.1, 0.9, size=(5, 1))
	t = rng(9).uniform(0, 1, size=(5, 1))
	eps = 1e-6
	numeric = np.zeros_like(p)
	for i in range(p.size):
		d = np.zeros_like(p)
		d.flat[i] = eps
		numeric.flat[i] = (loss_binary_crossentropy(p + d, t) - loss_binary_crossentropy(p - d, t)) / (2 * eps)
	assert np.allclose(binary_crossentropy_grad(p, t), numeric, rtol=1e-5)

def test_adam_zero_gradient():
	p = Tensor(np.arange(4.0), dtype=np.float64)
	state = adam_update([p], [np.zeros(4)], AdamState.zeros([p]))
	assert state.t == 1
	assert np.array_equal(p.values, np.arange(4.0))

def test_adam_first_step():
	p = Tensor(np.zeros(3), dtype=np.float64)
	adam_update([p], [np.array([0.5, -2.0, 3.0])], AdamState.zeros([p], lr=1e-3))
	assert np.allclose(p.values, [-1e-3, 1e-3, -1e-3], rtol=1e-6)

def test_adam_nan_halts():
	p = Tensor(np.zeros(2), dtype=np.float64)
	with pytest.raises(TrainingHalted):
		adam_update([p], [np.array([np.nan, 1.0])], AdamState.zeros([p]))
	assert np.array_equal(p.values, [0.0, 0.0])

def _train_tiny(seed):
	r = rng(seed)
	net = Network([Dense(4, 8, rng=r), ReLU(), Dense(8, 3, rng=r, init="glorot"), Softmax()])
	optimizer = Adam(net.parameters())
	x = rng(100).normal(size=(16, 4)).astype(np.float32)
	y = one_hot(np.arange(16) % 3, 3)
	losses = []
	for _ in range(20):
		optimizer.zeroGrad()
		probs = net.forward(x, training=True)
		losses.append(loss_categorical_crossentropy(probs, y))
		net.backward(categorical_crossentropy_grad(probs, y))
		optimizer.step()
	return net, losses

def test_training_deterministic():
	a, losses_a = _train_tiny(1)
	b, losses_b = _train_tiny(1)
	assert losses_a == losses_b
	assert a.parameterDigest() == b.parameterDigest()
	assert losses_a[-1] < losses_a[0]

def test_checkpoint_round_trip(tmp_path):
	net, _ = _train_tiny(2)
	path = save_checkpoint(net, tmp_path / "tiny.gdl")
	assert path.read_bytes()[:4] == MAGIC
	fresh, _ = _train_tiny(3)
	load_checkpoint(fresh, path)
	assert fresh.parameterDigest() == net.parameterDigest()

def test_checkpoint_rejects_other_architecture(tmp_path):
	net, _ = _train_tiny(2)
	path = save_checkpoint(net, tmp_path / "tiny.gdl")
	other = Network([Dense(4, 8), ReLU(), Dense(8, 2), Softmax()])
	before = other.parameterDigest()
	with pytest.raises(CheckpointFormatError):
		load_checkpoint(other, path)
	assert other.parameterDigest() == before

def test_checkpoint_bad_magic(tmp_path):
	path = tmp_path / "bad.gdl"
	path.write_bytes(b"XXXX" + bytes(16))
	with pytest.raises(CheckpointFormatError):
		load_checkpoint(Network([Dense(2, 2)]), path)
