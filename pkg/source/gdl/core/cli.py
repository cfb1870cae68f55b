'''
The ``gdl`` command line tool.

Every subcommand ends by printing one summary line::

	gdl <command> key=value key=value ...

with keys sorted; artifact digests are SHA-256 of the files written. Exit
codes: 0 success, 1 usage error, 2 runtime error.
'''

from __future__ import annotations # remove in Python 3.10

import sys
import hashlib
import pathlib
import argparse
from typing import Dict, Iterable, List, Optional

import numpy as np

from .version import __version__
from .config import ExperimentConfig
from .shapegen import SHAPE_CLASS_NAMES, synth_dataset, freehand_dataset, resample_dataset, subset_dataset
from .dataset import LabeledDataset, file_sha256
from .classifier import CnnSpec, build_cnn, train_classifier, evaluate
from .acgan import (SPEC_FILENAME, GENERATOR_FILENAME, HISTORY_FILENAME, train_acgan, load_generator,
                    generate, label_fidelity)
from .nn import Network, save_checkpoint, load_checkpoint
from .facade import FacadePattern, SkySchedule, DEFAULT_ROOM
from .daylight import LABEL_NAMES, compute_sda, synth_facade_dataset, psg_ranges
from .imageproc import postprocess_facade
from .imagegrid import ImageGrid
from .cache import SdaCache
from .reports import make_table1_report, ascii_plot
from .utilities.seeds import derive_seed
from .exc import GDLException, ConfigurationError
from .logger import gdl_logger as logger, set_verbosity

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2

CLASSIFIER_FILENAME = "classifier.gdl"
CNN_HISTORY_FILENAME = "cnn_history.csv"

class _Parser(argparse.ArgumentParser):
	''' argparse exits with 2 on usage errors; this tool reserves 2 for runtime errors. '''
	def error(self, message):
		self.print_usage(sys.stderr)
		self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")

def _summary(command:str, **fields) -> str:
	parts = []
	for key in sorted(fields):
		value = fields[key]
		if isinstance(value, (float, np.floating)):
			value = f"{value:.6f}"
		elif isinstance(value, bool):
			value = str(value).lower()
		parts.append(f"{key}={value}")
	return " ".join([f"gdl {command}"] + parts)

def _digest_files(paths:Iterable[pathlib.Path]) -> str:
	''' SHA-256 over the digests of several files, in the given order. '''
	sha = hashlib.sha256()
	for path in paths:
		sha.update(file_sha256(path).encode())
	return sha.hexdigest()

def _require(value, name:str):
	if value is None:
		raise ConfigurationError(f"This command needs '{name}' (flag or config file).")
	return value

def _schedule_cache(args) -> Optional[SdaCache]:
	return SdaCache.defaultCache() if args.cache else None

# subcommands
# -----------

def cmd_synth_shapes(cfg:ExperimentConfig, args) -> Dict:
	dataset = synth_dataset(cfg.per_class, seed=cfg.seed)
	manifest = dataset.save(cfg.outputPath, label_as_name=True)
	return dict(files=len(dataset), manifest_sha256=file_sha256(manifest), out=cfg.outputPath)

def cmd_synth_freehand(cfg:ExperimentConfig, args) -> Dict:
	dataset = freehand_dataset(cfg.count(45), seed=cfg.seed)
	manifest = dataset.save(cfg.outputPath, label_as_name=True)
	return dict(files=len(dataset), manifest_sha256=file_sha256(manifest), out=cfg.outputPath)

def cmd_train_cnn(cfg:ExperimentConfig, args) -> Dict:
	dataset = LabeledDataset.load(_require(cfg.dataset, "dataset"), SHAPE_CLASS_NAMES)
	net, history = train_classifier(dataset, cfg.trainConfig(), progress=args.verbose)
	out = cfg.outputPath
	out.mkdir(parents=True, exist_ok=True)
	checkpoint = save_checkpoint(net, out / CLASSIFIER_FILENAME)
	history_path = history.write(out / CNN_HISTORY_FILENAME)
	if args.ascii_plot:
		print(ascii_plot({"train": history.column("train_acc"), "val": history.column("val_acc")}, title="accuracy"))
		print(ascii_plot({"train": history.column("train_loss"), "val": history.column("val_loss")}, title="loss"))
	best = history.records[history.best_epoch - 1]
	return dict(best_epoch=history.best_epoch, val_acc=best.val_acc, val_loss=best.val_loss,
	            checkpoint_sha256=file_sha256(checkpoint), history_sha256=file_sha256(history_path))

def _load_cnn(path) -> Network:
	net = build_cnn(CnnSpec())
	load_checkpoint(net, path)
	return net

def cmd_train_acgan(cfg:ExperimentConfig, args) -> Dict:
	profile = cfg.ganProfile()
	dataset = LabeledDataset.load(_require(cfg.dataset, "dataset"), profile.label_names)
	if dataset.imageShape != profile.image_shape:
		dataset = resample_dataset(dataset, *profile.image_shape)
	if profile.images is not None and len(dataset) > profile.images:
		dataset = subset_dataset(dataset, profile.images, derive_seed(cfg.seed, "subset"))
	logger.info(f"profile '{profile.name}': {len(dataset)} images of {profile.image_shape}")
	_, _, history = train_acgan(dataset, cfg.ganSpec(profile), cfg.ganTrainConfig(profile),
	                            output_dir=cfg.outputPath, progress=args.verbose)
	if args.ascii_plot:
		print(ascii_plot({"d_loss": history.column("d_loss"), "g_loss": history.column("g_loss")}, title="loss"))
	last = history.records[-1]
	return dict(profile=profile.name, images=len(dataset), steps=len(history), d_loss=last.d_loss, g_loss=last.g_loss,
	            generator_sha256=file_sha256(cfg.outputPath / GENERATOR_FILENAME),
	            history_sha256=file_sha256(cfg.outputPath / HISTORY_FILENAME))

def _generator_path(cfg:ExperimentConfig) -> pathlib.Path:
	return pathlib.Path(cfg.checkpoint) if cfg.checkpoint else cfg.outputPath / GENERATOR_FILENAME

def cmd_generate(cfg:ExperimentConfig, args) -> Dict:
	generator = load_generator(_generator_path(cfg))
	labels = [cfg.label] if cfg.label is not None else list(generator.spec.label_names)
	n = cfg.count(1)
	out = cfg.outputPath
	out.mkdir(parents=True, exist_ok=True)
	paths = []
	for label in labels:
		images = generate(generator, label, n, derive_seed(cfg.seed, "cli", str(label)))
		for i, image in enumerate(images):
			paths.append(image.toPGM(out / f"generated_{label}_{i:03d}.pgm"))
	return dict(files=len(paths), images_sha256=_digest_files(paths), out=out)

def cmd_synth_facade(cfg:ExperimentConfig, args) -> Dict:
	dataset = synth_facade_dataset(cfg.facade_seeds, cache=_schedule_cache(args), progress=args.verbose)
	manifest = dataset.save(cfg.outputPath, label_as_name=True)
	ranges = cfg.outputPath / "psg_ranges.csv"
	psg_ranges(dataset).write(ranges, format="ascii.csv", overwrite=True)
	return dict(patterns=len(dataset), manifest_sha256=file_sha256(manifest), ranges_sha256=file_sha256(ranges))

def _read_pattern(path:pathlib.Path, cfg:ExperimentConfig) -> FacadePattern:
	''' A 72 × 32 PGM (post-processed onto the grid) or a text file of 8 lines of 18 ``0``/``1``. '''
	if path.suffix.lower() == ".pgm":
		return postprocess_facade(ImageGrid.fromPGM(path), tolerance_pct=cfg.tolerance_pct)
	return FacadePattern.fromText(path.read_text())

def cmd_simulate_sda(cfg:ExperimentConfig, args) -> Dict:
	pattern = _read_pattern(pathlib.Path(args.pattern), cfg)
	result = compute_sda(DEFAULT_ROOM, pattern, SkySchedule(), cache=_schedule_cache(args))
	return dict(label=result.label.value, sda=result.sda, wwr=pattern.wwr)

def cmd_evaluate(cfg:ExperimentConfig, args) -> Dict:
	'''
	A classifier checkpoint is scored on ``--dataset``; a generator checkpoint
	(``gan_spec.json`` beside it) is scored per label: facades by WWR, sDA and
	the conditioning × sDA confusion matrix, shapes by label fidelity against ``--oracle``.
	'''
	checkpoint = pathlib.Path(_require(cfg.checkpoint, "checkpoint"))
	out = cfg.outputPath
	out.mkdir(parents=True, exist_ok=True)
	if not (checkpoint.parent / SPEC_FILENAME).exists():
		dataset = LabeledDataset.load(_require(cfg.dataset, "dataset"), SHAPE_CLASS_NAMES)
		report = evaluate(_load_cnn(checkpoint), dataset)
		confusion = report.writeConfusion(out / "confusion.csv")
		return dict(accuracy=report.accuracy, loss=report.mean_loss, samples=len(dataset),
		            confusion_sha256=file_sha256(confusion))

	generator = load_generator(checkpoint)
	n = cfg.count(16)
	if tuple(generator.spec.label_names) == LABEL_NAMES:
		report = make_table1_report(generator, n=n, seed=derive_seed(cfg.seed, "evaluate"),
		                            cache=_schedule_cache(args), tolerance_pct=cfg.tolerance_pct)
		table = report.write(out / "evaluation.csv")
		confusion = report.writeConfusion(out / "evaluation_confusion.csv")
		means = report.meanWwr()
		fields = {f"mean_wwr_{k}": v for k, v in means.items()}
		values = list(means.values())
		return dict(fields, samples=len(report), wwr_increasing=bool(np.all(np.diff(values) > 0)),
		            report_sha256=file_sha256(table), confusion_sha256=file_sha256(confusion))

	oracle = _load_cnn(_require(args.oracle, "oracle"))
	rates = label_fidelity(generator, oracle, n, derive_seed(cfg.seed, "evaluate"))
	return dict({f"fidelity_{k}": v for k, v in rates.items()}, fidelity_mean=float(np.mean(list(rates.values()))))

def cmd_report_table1(cfg:ExperimentConfig, args) -> Dict:
	generator = load_generator(_generator_path(cfg))
	psg = None
	if cfg.dataset is not None:
		psg = psg_ranges(LabeledDataset.load(cfg.dataset, LABEL_NAMES))
	report = make_table1_report(generator, n=cfg.count(1), seed=derive_seed(cfg.seed, "table1"), psg=psg,
	                            cache=_schedule_cache(args), tolerance_pct=cfg.tolerance_pct)
	out = cfg.outputPath
	out.mkdir(parents=True, exist_ok=True)
	path = report.write(out / "table1.csv")
	if not args.quiet:
		report.toTable().pprint(max_lines=-1, max_width=-1)
	agreeing = sum(row.agrees for row in report.rows)
	return dict(rows=len(report), agreeing=agreeing, report_sha256=file_sha256(path))

COMMANDS = {
	"synth-shapes": (cmd_synth_shapes, "write the synthetic six-class shape dataset"),
	"synth-freehand": (cmd_synth_freehand, "write the out-of-distribution freehand shapes"),
	"train-cnn": (cmd_train_cnn, "train the shape classifier"),
	"train-acgan": (cmd_train_acgan, "train a conditional GAN on shapes or facades"),
	"generate": (cmd_generate, "sample images from a trained generator"),
	"synth-facade": (cmd_synth_facade, "write the labeled facade pattern dataset"),
	"simulate-sda": (cmd_simulate_sda, "compute sDA and label of one facade pattern"),
	"evaluate": (cmd_evaluate, "score a classifier or a generator"),
	"report-table1": (cmd_report_table1, "generate one facade per label and compare WWR and sDA labels"),
}

def build_parser() -> argparse.ArgumentParser:
	common = _Parser(add_help=False)
	common.add_argument("--config", help="JSON configuration file")
	common.add_argument("--seed", type=int, help="master seed (required here or in the config file)")
	common.add_argument("--out", dest="output_dir", help="output directory")
	common.add_argument("--dataset", help="dataset directory (manifest.csv + PGM files)")
	common.add_argument("--checkpoint", help="model checkpoint file")
	common.add_argument("--profile", help="GAN profile: shapes, shapes-ci or facade")
	common.add_argument("--per-class", type=int, help="images per shape class")
	common.add_argument("--epochs", type=int)
	common.add_argument("--steps", type=int)
	common.add_argument("--batch-size", type=int)
	common.add_argument("--label", help="conditioning label name")
	common.add_argument("--n", type=int, help="number of samples")
	common.add_argument("--cache", action="store_true", help="store sDA results in the local cache")
	common.add_argument("--ascii-plot", action="store_true", help="print training curves as text")
	common.add_argument("-v", "--verbose", action="store_true")
	common.add_argument("-q", "--quiet", action="store_true")

	parser = _Parser(prog="gdl", description="Synthetic datasets, classifier and conditional GAN training, and daylight evaluation of generated facades.")
	parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
	subparsers = parser.add_subparsers(dest="command", metavar="command")
	subparsers.required = True
	for name, (_, help_text) in COMMANDS.items():
		sub = subparsers.add_parser(name, parents=[common], help=help_text)
		if name == "simulate-sda":
			sub.add_argument("pattern", help="pattern file: 72x32 PGM or 8 lines of 18 0/1 characters")
		if name == "evaluate":
			sub.add_argument("--oracle", help="classifier checkpoint used to score shape generators")
	return parser

def main(argv:Optional[List[str]]=None) -> int:
	parser = build_parser()
	try:
		args = parser.parse_args(argv)
	except SystemExit as e:
		# --help, --version and usage errors
		return e.code if isinstance(e.code, int) else EXIT_USAGE
	set_verbosity(verbose=args.verbose, quiet=args.quiet)
	command, _ = COMMANDS[args.command]
	try:
		cfg = ExperimentConfig.fromFile(args.config, seed=args.seed, output_dir=args.output_dir, dataset=args.dataset,
		                                checkpoint=args.checkpoint, profile=args.profile, per_class=args.per_class,
		                                epochs=args.epochs, steps=args.steps, batch_size=args.batch_size,
		                                label=args.label, n=args.n)
		fields = command(cfg, args)
	except (GDLException, OSError, ValueError) as e:
		logger.error(f"{args.command}: {e}")
		print(f"gdl {args.command}: error: {e}", file=sys.stderr)
		return EXIT_RUNTIME
	print(_summary(args.command, **fields))
	return EXIT_OK

if __name__ == "__main__":
	sys.exit(main())
