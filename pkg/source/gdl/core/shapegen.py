'''
Parametric synthesis of jittered 2D shapes of six classes, rasterized to grayscale images.

Every shape starts from a canonical template (see ``docs/templates.rst``) in a
100 × 100 frame centered at (50, 50). Corner points move randomly inside a
disk, mid-edge points slide along one axis, and the whole polygon is scaled
about the frame center. Image coordinates: ``x`` to the right (columns), ``y``
down (rows); pixel ``(row i, column j)`` has its center at ``(j + 0.5, i + 0.5)``.
'''

from __future__ import annotations # remove in Python 3.10

import enum
import warnings
import dataclasses
from typing import List, Optional, Sequence, Tuple

import numpy as np
from astropy.table import Table

from .exc import ShapeGeometryError, PolygonSamplingError, DegeneratePolygonWarning
from .dataset import LabeledDataset, empty_manifest
from .imagegrid import ImageGrid, DEFAULT_IMAGE_SIZE
from .utilities.seeds import derive_seed
from .utilities.designpatterns import memoize
from .logger import gdl_logger as logger

MAX_SAMPLING_ATTEMPTS = 100
FRAME_CENTER = (50.0, 50.0)

class ShapeClass(enum.IntEnum):
	''' The six shape classes; the integer value is the label (alphabetical order). '''
	I = 0
	L = 1
	Rectangle = 2
	Square = 3
	T = 4
	Z = 5

SHAPE_CLASS_NAMES = tuple(c.name for c in ShapeClass)

@dataclasses.dataclass(frozen=True)
class JitterSpec:
	'''
	Random variation applied to a template.

	:param corner_radius: radius (px) of the disk each corner may move within
	:param edge_nudge: maximum displacement (px) of a mid-edge point along its axis
	:param scale_range: closed interval of scale factors, within (0, 1]
	'''
	corner_radius: float = 4.0
	edge_nudge: float = 3.0
	scale_range: Tuple[float, float] = (0.5, 1.0)

	def __post_init__(self):
		if self.corner_radius < 0 or self.edge_nudge < 0:
			raise ValueError("Jitter magnitudes must be non-negative.")
		lo, hi = self.scale_range
		if not (0 < lo <= hi <= 1):
			raise ValueError(f"scale_range must lie within (0, 1] with low ≤ high; got {self.scale_range}.")

DEFAULT_JITTER = JitterSpec()

CORNER = "corner"
EDGE = "edge"

# (x, y, kind, axis) - axis is the coordinate a mid-edge point moves along (0 = x, 1 = y)
_TEMPLATES = {
	ShapeClass.I: (
		(42, 12, CORNER, None), (58, 12, CORNER, None), (58, 50, EDGE, 0),
		(58, 88, CORNER, None), (42, 88, CORNER, None), (42, 50, EDGE, 0),
	),
	ShapeClass.L: (
		(30, 15, CORNER, None), (50, 15, CORNER, None), (50, 65, CORNER, None),
		(70, 65, CORNER, None), (70, 85, CORNER, None), (30, 85, CORNER, None),
	),
	ShapeClass.Rectangle: (
		(14, 32, CORNER, None), (86, 32, CORNER, None), (86, 68, CORNER, None), (14, 68, CORNER, None),
	),
	ShapeClass.Square: (
		(20, 20, CORNER, None), (80, 20, CORNER, None), (80, 80, CORNER, None), (20, 80, CORNER, None),
	),
	ShapeClass.T: (
		(10, 15, CORNER, None), (90, 15, CORNER, None), (90, 35, CORNER, None), (60, 35, CORNER, None),
		(60, 85, CORNER, None), (40, 85, CORNER, None), (40, 35, CORNER, None), (10, 35, CORNER, None),
	),
	ShapeClass.Z: (
		(15, 25, CORNER, None), (65, 25, CORNER, None), (65, 50, CORNER, None), (85, 50, CORNER, None),
		(85, 75, CORNER, None), (35, 75, CORNER, None), (35, 50, CORNER, None), (15, 50, CORNER, None),
	),
}

# (aspect ratio = bbox width / height, fill ratio = area / bbox area) boxes, half-open on the upper side
CLASS_ENVELOPES = {
	ShapeClass.I:         {"aspect": (0.00, 0.40), "fill": (0.60, 1.01)},
	ShapeClass.L:         {"aspect": (0.40, 0.78), "fill": (0.45, 0.80)},
	ShapeClass.Rectangle: {"aspect": (1.70, 2.60), "fill": (0.80, 1.01)},
	ShapeClass.Square:    {"aspect": (0.78, 1.30), "fill": (0.80, 1.01)},
	ShapeClass.T:         {"aspect": (0.90, 1.40), "fill": (0.30, 0.55)},
	ShapeClass.Z:         {"aspect": (1.15, 1.70), "fill": (0.55, 0.80)},
}

def _orientation(ax, ay, bx, by, cx, cy):
	# > 0: c left of a->b, < 0: right, 0: collinear
	return (bx - ax) * (cy - ay) - (cx - ax) * (by - ay)

class Polygon:
	'''
	A polygon in image coordinates (pixels).

	Vertices are stored so that the shoelace (signed) area is non-negative;
	this is the package's counter-clockwise convention. In image coordinates
	(``y`` pointing down) such a polygon is traversed clockwise on screen.

	:param vertices: sequence of ``(x, y)`` points, at least three
	:param corners: optional mask marking which vertices are corners (others are mid-edge points)
	:param scale: the scale factor the polygon was drawn with, if known
	'''
	def __init__(self, vertices, corners:Optional[Sequence[bool]]=None, scale:float=1.0):
		vertices = np.array(vertices, dtype=np.float64)
		if vertices.ndim != 2 or vertices.shape[1] != 2 or len(vertices) < 3:
			raise ShapeGeometryError(f"A polygon needs at least three (x, y) vertices; got shape {vertices.shape}.")
		if not np.all(np.isfinite(vertices)):
			raise ShapeGeometryError("Polygon vertices must be finite.")
		corners = np.ones(len(vertices), dtype=bool) if corners is None else np.array(corners, dtype=bool)
		if self._signed_area(vertices) < 0:
			vertices = vertices[::-1].copy()
			corners = corners[::-1].copy()
		vertices.setflags(write=False)
		corners.setflags(write=False)
		self._vertices = vertices
		self.corners = corners
		self.scale = float(scale)

	def __repr__(self):
		return f"<{self.__class__.__module__}.{self.__class__.__name__} object at {hex(id(self))} n={len(self)} area={self.area:.1f}>"

	def __len__(self):
		return len(self._vertices)

	def __eq__(self, other):
		if not isinstance(other, Polygon):
			return NotImplemented
		return self._vertices.shape == other._vertices.shape and np.array_equal(self._vertices, other._vertices)

	__hash__ = None

	@staticmethod
	def _signed_area(v:np.ndarray) -> float:
		x, y = v[:, 0], v[:, 1]
		return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

	@property
	def vertices(self) -> np.ndarray:
		''' Read-only ``(n, 2)`` array of vertices. '''
		return self._vertices

	@property
	def area(self) -> float:
		return self._signed_area(self._vertices)

	@property
	def bounds(self) -> Tuple[float, float, float, float]:
		''' ``(xmin, ymin, xmax, ymax)`` '''
		(xmin, ymin), (xmax, ymax) = self._vertices.min(axis=0), self._vertices.max(axis=0)
		return float(xmin), float(ymin), float(xmax), float(ymax)

	def isWithin(self, size:int) -> bool:
		''' ``True`` if all vertices lie inside the ``size`` × ``size`` frame. '''
		return bool(np.all(self._vertices >= 0) and np.all(self._vertices <= size))

	def isSimple(self) -> bool:
		'''
		``True`` if no two edges intersect other than adjacent edges at their shared vertex.
		'''
		v = self._vertices
		n = len(v)
		a = v
		b = np.roll(v, -1, axis=0)
		if np.any(np.all(a == b, axis=1)):
			return False # repeated vertex

		# adjacent edges folding back onto each other
		prev = np.roll(v, 1, axis=0)
		turn = _orientation(prev[:, 0], prev[:, 1], a[:, 0], a[:, 1], b[:, 0], b[:, 1])
		backtrack = np.sum((a - prev) * (b - a), axis=1) < 0
		if np.any((turn == 0) & backtrack):
			return False

		i, j = np.triu_indices(n, k=2)
		keep = ~((i == 0) & (j == n - 1)) # first and last edge share vertex 0
		i, j = i[keep], j[keep]
		if len(i) == 0:
			return True
		ax, ay, bx, by = a[i, 0], a[i, 1], b[i, 0], b[i, 1]
		cx, cy, dx, dy = a[j, 0], a[j, 1], b[j, 0], b[j, 1]
		o1 = _orientation(ax, ay, bx, by, cx, cy)
		o2 = _orientation(ax, ay, bx, by, dx, dy)
		o3 = _orientation(cx, cy, dx, dy, ax, ay)
		o4 = _orientation(cx, cy, dx, dy, bx, by)
		proper = (o1 * o2 < 0) & (o3 * o4 < 0)
		if np.any(proper):
			return False

		def on_segment(px, py, qx, qy, rx, ry, o):
			# r collinear with p-q and inside its bounding box
			return (o == 0) & (np.minimum(px, qx) <= rx) & (rx <= np.maximum(px, qx)) \
			                & (np.minimum(py, qy) <= ry) & (ry <= np.maximum(py, qy))
		touching = on_segment(ax, ay, bx, by, cx, cy, o1) | on_segment(ax, ay, bx, by, dx, dy, o2) \
		         | on_segment(cx, cy, dx, dy, ax, ay, o3) | on_segment(cx, cy, dx, dy, bx, by, o4)
		return not bool(np.any(touching))

	def scaledTemplateDistances(self, template:"Polygon") -> np.ndarray:
		'''
		Distances of each corner from the corresponding template corner after scaling the template by :attr:`scale`.
		'''
		cx, cy = FRAME_CENTER
		scaled = np.column_stack([cx + self.scale * (template.vertices[:, 0] - cx),
		                          cy + self.scale * (template.vertices[:, 1] - cy)])
		d = np.hypot(*(self._vertices - scaled).T)
		return d[self.corners]

	def toText(self) -> str:
		''' Debug dump: one ``x y`` vertex per line. '''
		return "".join(f"{x:.6f} {y:.6f}\n" for x, y in self._vertices)

@memoize
def canonical_template(shape_class:ShapeClass) -> Polygon:
	'''
	The fixed vertex list of a class in the 100 × 100 frame.

	:param shape_class: the class
	'''
	shape_class = ShapeClass(shape_class)
	points = _TEMPLATES[shape_class]
	return Polygon([(x, y) for x, y, _, _ in points], corners=[kind == CORNER for _, _, kind, _ in points])

def _jittered_vertices(shape_class:ShapeClass, jitter:JitterSpec, rng:np.random.Generator) -> Tuple[np.ndarray, float]:
	points = _TEMPLATES[shape_class]
	cx, cy = FRAME_CENTER
	scale = float(rng.uniform(*jitter.scale_range))
	vertices = []
	for x, y, kind, axis in points:
		# always draw both numbers so the stream does not depend on the vertex kind
		u, w = rng.random(2)
		offset = [0.0, 0.0]
		if kind == CORNER:
			r = jitter.corner_radius * np.sqrt(u)
			theta = 2.0 * np.pi * w
			offset = [r * np.cos(theta), r * np.sin(theta)]
		else:
			offset[axis] = jitter.edge_nudge * (2.0 * u - 1.0)
		vertices.append((cx + scale * (x - cx + offset[0]), cy + scale * (y - cy + offset[1])))
	return np.array(vertices), scale

def sample_polygon(shape_class:ShapeClass, jitter:JitterSpec=DEFAULT_JITTER, seed:int=0) -> Polygon:
	'''
	Draw one jittered, scaled polygon of a class.

	A draw that is not simple is rejected and redrawn with a derived sub-seed.

	:param shape_class: the class
	:param jitter: jitter magnitudes and scale range
	:param seed: 64-bit seed; equal seeds give identical polygons
	:raises PolygonSamplingError: if no simple polygon is found in 100 attempts
	'''
	shape_class = ShapeClass(shape_class)
	corners = [kind == CORNER for _, _, kind, _ in _TEMPLATES[shape_class]]
	for attempt in range(MAX_SAMPLING_ATTEMPTS):
		attempt_seed = seed if attempt == 0 else derive_seed(seed, "resample", attempt)
		vertices, scale = _jittered_vertices(shape_class, jitter, np.random.default_rng(attempt_seed))
		polygon = Polygon(vertices, corners=corners, scale=scale)
		if polygon.isSimple() and polygon.isWithin(DEFAULT_IMAGE_SIZE):
			if attempt > 0:
				logger.debug(f"{shape_class.name}: simple polygon found after {attempt + 1} attempts (seed {seed})")
			return polygon
	raise PolygonSamplingError(f"No simple {shape_class.name} polygon found in {MAX_SAMPLING_ATTEMPTS} attempts (seed {seed}).")

def points_in_polygon(px:np.ndarray, py:np.ndarray, vertices:np.ndarray) -> np.ndarray:
	'''
	Even-odd (crossing number) test for many points at once.

	A horizontal ray is cast to the right of each point; an edge counts when it
	straddles the ray half-open in ``y`` and crosses it strictly right of the point.

	:param px: x coordinates, any shape
	:param py: y coordinates, same shape as ``px``
	:param vertices: ``(n, 2)`` polygon vertices
	:returns: boolean array shaped like ``px``
	'''
	px = np.asarray(px, dtype=np.float64)
	py = np.asarray(py, dtype=np.float64)
	x1 = vertices[:, 0].reshape((-1,) + (1,) * px.ndim)
	y1 = vertices[:, 1].reshape((-1,) + (1,) * px.ndim)
	x2 = np.roll(vertices[:, 0], -1).reshape(x1.shape)
	y2 = np.roll(vertices[:, 1], -1).reshape(y1.shape)
	straddles = (y1 <= py) != (y2 <= py)
	with np.errstate(divide="ignore", invalid="ignore"):
		x_cross = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
	crossings = np.count_nonzero(straddles & (px < x_cross), axis=0)
	return crossings % 2 == 1

@memoize
def _pixel_centers(size:int) -> Tuple[np.ndarray, np.ndarray]:
	centers = np.arange(size, dtype=np.float64) + 0.5
	return tuple(np.meshgrid(centers, centers)) # y varies along rows

def rasterize(polygon:Polygon, size:int=DEFAULT_IMAGE_SIZE) -> ImageGrid:
	'''
	Binary rasterization: a pixel is 1.0 when its center is inside the polygon (even-odd rule), else 0.0.

	A zero-area polygon yields an all-background image and a :class:`DegeneratePolygonWarning`.

	:param polygon: a polygon inside the frame
	:param size: image side length in pixels
	'''
	if not polygon.isWithin(size):
		raise ShapeGeometryError(f"Polygon with bounds {polygon.bounds} does not fit in a {size}x{size} image.")
	if abs(polygon.area) < 1e-12:
		logger.warning("rasterizing a zero-area polygon; the image is empty")
		warnings.warn("zero-area polygon rasterized to an empty image", DegeneratePolygonWarning)
		return ImageGrid.blank(size, size)
	px, py = _pixel_centers(size)
	inside = points_in_polygon(px, py, polygon.vertices)
	return ImageGrid(inside.astype(np.float32))

def synth_dataset(n_per_class:int, jitter:JitterSpec=DEFAULT_JITTER, seed:int=0, size:int=DEFAULT_IMAGE_SIZE) -> LabeledDataset:
	'''
	Synthesize a balanced dataset of ``6 × n_per_class`` labeled shape images.

	Sample ``k`` of class ``c`` uses the sub-seed ``derive_seed(seed, "shape", c, k)``.

	:param n_per_class: samples per class (≥ 0)
	:param jitter: jitter specification
	:param seed: master seed
	:param size: image side length
	'''
	if n_per_class < 0:
		raise ValueError("n_per_class must be non-negative.")
	samples = []
	rows = []
	for shape_class in ShapeClass:
		for k in range(n_per_class):
			sample_seed = derive_seed(seed, "shape", int(shape_class), k)
			image = rasterize(sample_polygon(shape_class, jitter, sample_seed), size)
			filename = f"{shape_class.name.lower()}_{k:05d}.pgm"
			samples.append((image, int(shape_class)))
			rows.append((filename, int(shape_class), sample_seed))
	if rows:
		manifest = Table(rows=rows, names=("filename", "label", "seed"), dtype=(str, np.int64, np.int64))
	else:
		manifest = empty_manifest(("filename", "label", "seed"), (str, np.int64, np.int64))
	logger.info(f"synthesized {len(samples)} shape images ({n_per_class} per class, seed {seed})")
	return LabeledDataset(samples, manifest, SHAPE_CLASS_NAMES)

# freehand-style test shapes
# --------------------------

@dataclasses.dataclass(frozen=True)
class FreehandSpec:
	'''
	The distribution of the hand-drawn style test set: larger jitter plus a low-frequency wobble along every edge.

	:param jitter: corner/edge jitter, larger than the training default
	:param wobble_amplitude: peak sideways displacement of an edge, in px (0 disables the wobble)
	:param wobble_periods: allowed numbers of half-waves per edge
	:param points_per_edge: sub-segments each edge is split into when wobbling
	'''
	jitter: JitterSpec = JitterSpec(corner_radius=5.0, edge_nudge=2.5, scale_range=(0.55, 1.0))
	wobble_amplitude: float = 1.5
	wobble_periods: Tuple[int, ...] = (1, 2)
	points_per_edge: int = 12

DEFAULT_FREEHAND = FreehandSpec()

def _wobble(polygon:Polygon, spec:FreehandSpec, rng:np.random.Generator) -> Polygon:
	v = polygon.vertices
	out = []
	corners = []
	t = np.arange(spec.points_per_edge) / spec.points_per_edge
	for k in range(len(v)):
		p, q = v[k], v[(k + 1) % len(v)]
		edge = q - p
		length = np.hypot(*edge)
		normal = np.array([edge[1], -edge[0]]) / length if length > 0 else np.zeros(2)
		periods = rng.choice(spec.wobble_periods)
		amplitude = spec.wobble_amplitude * rng.uniform(0.5, 1.0) * rng.choice([-1.0, 1.0])
		# sin(pi k t) vanishes at both ends, so corners stay put
		offsets = amplitude * polygon.scale * np.sin(np.pi * periods * t)
		points = p + np.outer(t, edge) + np.outer(offsets, normal)
		out.extend(points)
		corners.extend([polygon.corners[k]] + [False] * (spec.points_per_edge - 1))
	return Polygon(out, corners=corners, scale=polygon.scale)

def freehand_polygon(shape_class:ShapeClass, spec:FreehandSpec=DEFAULT_FREEHAND, seed:int=0) -> Polygon:
	'''
	Draw one freehand-style polygon. With ``wobble_amplitude == 0`` this is exactly
	``sample_polygon(shape_class, spec.jitter, seed)``.
	'''
	shape_class = ShapeClass(shape_class)
	for attempt in range(MAX_SAMPLING_ATTEMPTS):
		attempt_seed = seed if attempt == 0 else derive_seed(seed, "freehand-resample", attempt)
		base = sample_polygon(shape_class, spec.jitter, attempt_seed)
		if spec.wobble_amplitude == 0:
			return base
		polygon = _wobble(base, spec, np.random.default_rng(derive_seed(attempt_seed, "wobble")))
		if polygon.isSimple() and polygon.isWithin(DEFAULT_IMAGE_SIZE):
			return polygon
	raise PolygonSamplingError(f"No simple freehand {shape_class.name} found in {MAX_SAMPLING_ATTEMPTS} attempts (seed {seed}).")

def freehand_dataset(n:int, seed:int=0, spec:FreehandSpec=DEFAULT_FREEHAND, size:int=DEFAULT_IMAGE_SIZE) -> LabeledDataset:
	'''
	The out-of-distribution test set. Sample ``i`` has class ``i mod 6``, so any ``n ≥ 6`` covers all classes.

	:param n: number of samples (≥ 1)
	:param seed: master seed
	'''
	if n < 1:
		raise ValueError("A freehand dataset needs at least one sample.")
	samples = []
	rows = []
	for i in range(n):
		shape_class = ShapeClass(i % len(ShapeClass))
		sample_seed = derive_seed(seed, "freehand", i)
		image = rasterize(freehand_polygon(shape_class, spec, sample_seed), size)
		samples.append((image, int(shape_class)))
		rows.append((f"freehand_{i:03d}_{shape_class.name.lower()}.pgm", int(shape_class), sample_seed))
	manifest = Table(rows=rows, names=("filename", "label", "seed"), dtype=(str, np.int64, np.int64))
	return LabeledDataset(samples, manifest, SHAPE_CLASS_NAMES)

# dataset utilities
# -----------------

def shape_statistics(image:ImageGrid) -> Tuple[float, float]:
	'''
	``(aspect ratio, fill ratio)`` of the foreground: bounding-box width over height, and foreground pixels over bounding-box area.

	Returns ``(nan, nan)`` for an empty image.
	'''
	mask = image.values >= 0.5
	if not mask.any():
		return float("nan"), float("nan")
	rows = np.flatnonzero(mask.any(axis=1))
	cols = np.flatnonzero(mask.any(axis=0))
	h = rows[-1] - rows[0] + 1
	w = cols[-1] - cols[0] + 1
	return w / h, mask.sum() / (w * h)

def resample_dataset(dataset:LabeledDataset, height:int, width:Optional[int]=None) -> LabeledDataset:
	'''
	Area-average every image to a new size (e.g. 100 × 100 → 64 × 64 for GAN training).
	'''
	width = height if width is None else width
	return dataset.withImages([image.resized(height, width) for image in dataset.images])

def subset_dataset(dataset:LabeledDataset, n:int, seed:int) -> LabeledDataset:
	'''
	A class-stratified random subset of ``n`` samples, kept in the original order.

	Per-class quotas follow the class proportions, rounded by largest remainder.
	'''
	if not 0 <= n <= len(dataset):
		raise ValueError(f"Cannot draw {n} samples from a dataset of {len(dataset)}.")
	labels = dataset.labels
	counts = np.bincount(labels, minlength=len(dataset.label_names))
	exact = n * counts / max(len(dataset), 1)
	quota = np.floor(exact).astype(int)
	remainder_order = np.lexsort((np.arange(len(counts)), -(exact - quota)))
	for c in remainder_order[:n - quota.sum()]:
		quota[c] += 1
	chosen = []
	for c in range(len(counts)):
		members = np.flatnonzero(labels == c)
		rng = np.random.default_rng(derive_seed(seed, "subset", c))
		chosen.extend(rng.permutation(members)[:quota[c]])
	return dataset.subset(sorted(int(i) for i in chosen))
