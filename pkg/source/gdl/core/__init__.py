from .version import __version__

from .imagegrid import ImageGrid
from .dataset import LabeledDataset
from .shapegen import ShapeClass, JitterSpec, Polygon, sample_polygon, rasterize, synth_dataset, freehand_dataset
from .classifier import CnnSpec, TrainConfig, build_cnn, train_classifier, predict, evaluate
from .acgan import GanSpec, GanTrainConfig, train_acgan, generate, load_generator, label_fidelity
from .facade import RoomModel, FacadePattern, SkySchedule, sun_position
from .daylight import PerformanceLabel, compute_sda, synth_facade_dataset, psg_ranges
from .imageproc import BinaryImage, StructuringElement, binarize, erode, dilate, opening, closing, ratio_preserving_clean, snap_to_grid
from .reports import Table1Report, make_table1_report
from .cache import SdaCache
from .config import ExperimentConfig
