
import logging

try:
	import coloredlogs
	colored_logs_available = True
except ImportError:
	colored_logs_available = False

try:
	gdl_logger
except NameError:

	# set up logger

	gdl_logger = logging.getLogger("gdl.core") # create new logger

	# default: coloredlogs.DEFAULT_LOG_FORMAT = '%(asctime)s %(hostname)s %(name)s[%(process)d] %(levelname)s %(message)s'
	log_format = '[%(filename)s:%(lineno)d] %(name)s %(levelname)s %(message)s'

	if colored_logs_available:
		# Use in a module as:
		#   from .logger import gdl_logger as logger
		#   logger.info("log message")

		field_styles = dict(coloredlogs.DEFAULT_FIELD_STYLES)
		level_styles = dict(coloredlogs.DEFAULT_LEVEL_STYLES)

		field_styles["levelname"] = {'color': 'yellow', 'bold': True}
		field_styles["name"] = {'color': 'yellow', 'bold': True} # logger name

		level_styles["warning"] = {'color': 'yellow', 'bold': True}
		level_styles["error"] = {'color': 'red', 'bold': False}
		level_styles["critical"] = {'color': 'red', 'bold': True}

		coloredlogs.install(level=logging.INFO, field_styles=field_styles, level_styles=level_styles,
		                    fmt=log_format, logger=gdl_logger)
	else:
		handler = logging.StreamHandler()
		handler.setFormatter(logging.Formatter(log_format))
		gdl_logger.addHandler(handler)
		gdl_logger.setLevel(logging.INFO)

def set_verbosity(verbose:bool=False, quiet:bool=False):
	'''
	Adjust the package log level; used by the command line tool.

	:param verbose: log DEBUG messages
	:param quiet: only log warnings and errors
	'''
	if quiet:
		level = logging.WARNING
	elif verbose:
		level = logging.DEBUG
	else:
		level = logging.INFO
	gdl_logger.setLevel(level)
	for handler in gdl_logger.handlers:
		handler.setLevel(level)
