
import pytest
import numpy as np
from astropy.table import Table

from gdl.core.classifier import (CnnSpec, ConvBlock, TrainConfig, TrainHistory, build_cnn, stratified_split,
                                 train_classifier, predict, evaluate, confusion_matrix, predict_probabilities)
from gdl.core.shapegen import ShapeClass, synth_dataset, freehand_dataset, resample_dataset, canonical_template, rasterize
from gdl.core.dataset import LabeledDataset
from gdl.core.imagegrid import ImageGrid
from gdl.core.exc import ShapeMismatchError, EmptyDataset

SMALL_SPEC = CnnSpec(input_shape=(1, 32, 32), conv_blocks=(ConvBlock(4, 5), ConvBlock(4, 3)), dense_widths=(16,))

@pytest.fixture(scope="module")
def small_dataset():
	return resample_dataset(synth_dataset(8, seed=12), 32)

@pytest.fixture(scope="module")
def trained(small_dataset):
	cfg = TrainConfig(epochs=3, batch_size=8, seed=5, learning_rate=3e-3)
	return train_classifier(small_dataset, cfg, spec=SMALL_SPEC)

def test_default_architecture():
	net = build_cnn(seed=1)
	assert net.input_shape == (1, 100, 100)
	assert net.outputShape((1, 100, 100)) == (6,)
	kinds = [layer.kind for layer in net.layers]
	assert kinds == ["conv2d", "relu", "max_pool2d", "conv2d", "relu", "max_pool2d", "flatten",
	                 "dense", "relu", "dropout", "dense", "softmax"]
	assert net.layers[0].filters == 30 and net.layers[0].kernel_size == (5, 5)
	assert net.layers[3].filters == 15 and net.layers[3].kernel_size == (3, 3)

def test_build_deterministic():
	assert build_cnn(SMALL_SPEC, seed=3).parameterDigest() == build_cnn(SMALL_SPEC, seed=3).parameterDigest()
	assert build_cnn(SMALL_SPEC, seed=3).parameterDigest() != build_cnn(SMALL_SPEC, seed=4).parameterDigest()

def test_inconsistent_spec():
	with pytest.raises(ShapeMismatchError):
		build_cnn(CnnSpec(input_shape=(1, 8, 8), conv_blocks=(ConvBlock(4, 5), ConvBlock(4, 5))))
	with pytest.raises(ShapeMismatchError):
		CnnSpec(num_classes=5)

@pytest.mark.parametrize("kwargs", [dict(epochs=0), dict(batch_size=0), dict(validation_split=0.0),
                                    dict(validation_split=1.0)])
def test_invalid_train_config(kwargs):
	with pytest.raises(ValueError):
		TrainConfig(**kwargs)

def test_stratified_split():
	labels = np.repeat(np.arange(6), 8)
	train, val, degenerate = stratified_split(labels, 0.25, seed=9)
	assert not degenerate
	assert len(np.intersect1d(train, val)) == 0
	assert len(train) + len(val) == len(labels)
	assert list(np.bincount(labels[val])) == [2] * 6
	again = stratified_split(labels, 0.25, seed=9)
	assert np.array_equal(again[0], train) and np.array_equal(again[1], val)

def test_stratified_split_single_class():
	_, _, degenerate = stratified_split(np.zeros(10, dtype=int), 0.25, seed=0)
	assert degenerate

def test_history(trained, tmp_path):
	_, history = trained
	assert len(history) == 3
	for record in history.records:
		assert 0 <= record.train_acc <= 1 and 0 <= record.val_acc <= 1
		assert np.isfinite(record.train_loss) and np.isfinite(record.val_loss)
	path = history.write(tmp_path / "history.csv")
	table = Table.read(path, format="ascii.csv")
	assert table.colnames == ["epoch", "train_acc", "train_loss", "val_acc", "val_loss"]
	assert list(table["epoch"]) == [1, 2, 3]

def test_best_weights_restored(trained, small_dataset):
	'''
	The returned network reproduces the validation accuracy of the best epoch.
	'''
	net, history = trained
	best = history.records[history.best_epoch - 1]
	assert best.val_acc == max(r.val_acc for r in history.records)
	_, val, _ = stratified_split(small_dataset.labels, 0.25, seed=_split_seed(5))
	x, y = small_dataset.asArrays()
	probs = predict_probabilities(net, x[val])
	assert float(np.mean(probs.argmax(axis=1) == y[val])) == pytest.approx(best.val_acc)

def _split_seed(master):
	from gdl.core.utilities.seeds import derive_seed
	return derive_seed(master, "split")

def test_training_deterministic(small_dataset, trained):
	net, history = trained
	cfg = TrainConfig(epochs=3, batch_size=8, seed=5, learning_rate=3e-3)
	net2, history2 = train_classifier(small_dataset, cfg, spec=SMALL_SPEC)
	assert net.parameterDigest() == net2.parameterDigest()
	assert history.records == history2.records

def test_memorize_single_sample():
	image = rasterize(canonical_template(ShapeClass.Square)).resized(32, 32)
	dataset = LabeledDataset([(image, int(ShapeClass.Square))] * 10,
	                         Table(rows=[(f"s{i}.pgm", 3) for i in range(10)], names=("filename", "label")), ("I", "L", "Rectangle", "Square", "T", "Z"))
	net, history = train_classifier(dataset, TrainConfig(epochs=10, batch_size=5, seed=1, learning_rate=1e-2), spec=SMALL_SPEC)
	assert history.degenerate
	assert history.records[-1].train_acc == 1.0
	assert predict(net, image)[0] == int(ShapeClass.Square)

def test_predict(trained):
	net, _ = trained
	label, probs = predict(net, ImageGrid.blank(32, 32))
	assert 0 <= label < 6
	assert probs.sum() == pytest.approx(1.0, abs=1e-5)
	again, probs_again = predict(net, ImageGrid.blank(32, 32))
	assert again == label and np.array_equal(probs, probs_again)

def test_predict_size_mismatch(trained):
	net, _ = trained
	with pytest.raises(ShapeMismatchError):
		predict(net, ImageGrid.blank(100, 100))

def test_evaluate(trained, small_dataset, tmp_path):
	net, _ = trained
	report = evaluate(net, small_dataset)
	assert report.confusion.shape == (6, 6)
	assert report.confusion.sum() == len(small_dataset)
	assert np.all(report.confusion >= 0)
	assert report.accuracy == pytest.approx(np.trace(report.confusion) / len(small_dataset))
	table = Table.read(report.writeConfusion(tmp_path / "confusion.csv"), format="ascii.csv")
	assert table.colnames == ["true", "I", "L", "Rectangle", "Square", "T", "Z"]

def test_evaluate_empty(trained, small_dataset):
	with pytest.raises(EmptyDataset):
		evaluate(trained[0], small_dataset.subset([]))

def test_confusion_matrix_perfect():
	labels = [0, 1, 2, 3, 4, 5, 5]
	matrix = confusion_matrix(labels, labels, 6)
	assert np.array_equal(matrix, np.diag([1, 1, 1, 1, 1, 2]))

@pytest.mark.slow
def test_standard_run_accuracy():
	'''
	The 6000-image run: validation accuracy ≥ 0.90 and loss ≤ 0.5 after 10 epochs;
	the 45 freehand shapes score ≥ 0.85.
	'''
	dataset = synth_dataset(1000, seed=42)
	cfg = TrainConfig(epochs=10, batch_size=20, seed=42)
	net, history = train_classifier(dataset, cfg)
	_, val, _ = stratified_split(dataset.labels, cfg.validation_split, seed=_split_seed(cfg.seed))
	final = evaluate(net, dataset.subset(val))
	assert final.accuracy >= 0.90
	assert final.mean_loss <= 0.5
	assert final.accuracy == pytest.approx(history.records[history.best_epoch - 1].val_acc)
	assert history.records[-1].val_acc >= history.records[0].val_acc
	assert predict(net, rasterize(canonical_template(ShapeClass.Square)))[0] == int(ShapeClass.Square)
	assert evaluate(net, freehand_dataset(45, seed=42)).accuracy >= 0.85
