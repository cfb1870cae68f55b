
class GDLException(Exception):
	pass

# shapes
# ------

class ShapeGeometryError(GDLException):
	pass

class PolygonSamplingError(GDLException):
	pass

class DegeneratePolygonWarning(UserWarning):
	pass

# networks
# --------

class ShapeMismatchError(GDLException):
	'''
	Raised when tensors do not compose; the message carries the dimension report.
	'''
	pass

class BackwardBeforeForward(GDLException):
	pass

class TrainingHalted(GDLException):
	'''
	Raised when a non-finite loss or gradient is found during training.

	:param step: the step (or epoch) at which training stopped
	:param checkpoint: path of the last good checkpoint written, if any
	'''
	def __init__(self, message:str, step:int=None, checkpoint=None):
		super().__init__(message)
		self.step = step
		self.checkpoint = checkpoint

class CheckpointFormatError(GDLException):
	pass

class UntrainedModelError(GDLException):
	pass

# data
# ----

class InvalidLabel(GDLException):
	pass

class EmptyDataset(GDLException):
	pass

class DatasetFormatError(GDLException):
	pass

# daylight / image processing
# ---------------------------

class ScheduleError(GDLException):
	pass

class GridDimensionError(GDLException):
	pass

class OutOfRangeError(GDLException):
	pass

# command line
# ------------

class ConfigurationError(GDLException):
	pass
