from __future__ import annotations # remove in Python 3.10
# Needed for forward references, see:
# https://stackoverflow.com/a/33533514/2712652

import os
import json
import pathlib
import sqlite3
import contextlib
from typing import Optional, Union

from .logger import gdl_logger as logger

CACHE_DIR_VARIABLE = "GDL_CACHE_DIR"

def default_cache_path() -> pathlib.Path:
	'''
	``$GDL_CACHE_DIR`` if set, else ``$HOME/.gdl_cache``.
	'''
	if CACHE_DIR_VARIABLE in os.environ:
		return pathlib.Path(os.environ[CACHE_DIR_VARIABLE])
	return pathlib.Path.home() / ".gdl_cache"

class SdaCache:
	'''
	A local SQLite database of sDA results so repeated runs skip the illuminance computation.

	Keys combine the room digest, the schedule digest, the model name and the
	pattern bit string; values are JSON. Results are identical with or without
	the cache. The cache is thread-safe and multiprocessing safe.

	:param path: directory where the database is written or found
	:param name: name of the database file
	'''

	_default_instance = None

	def __init__(self, path:Optional[Union[str, os.PathLike]]=None, name:str="_gdl_sda_cache.sqlite"):
		path = default_cache_path() if path is None else pathlib.Path(path)
		self._dbFilepath = path / name

		if not path.exists():
			try:
				os.makedirs(path)
			except FileExistsError as e:
				logger.debug(f"Path '{path}' appears not to exist, but 'os.makedirs(path)' is raising FileExistsError: {e}")
			except OSError as e:
				raise OSError(f"Unable to create specified path '{path}'; error: {e} ")

		if path.is_symlink():
			if not os.path.exists(os.readlink(path)):
				raise OSError(f"The cache path '{path}' is a symlink pointing to a target that is no longer there.")

		self._initialize_database()

	def __repr__(self):
		return f"<{self.__class__.__module__}.{self.__class__.__name__} object at {hex(id(self))} path='{self._dbFilepath}'>"

	@classmethod
	def defaultCache(cls) -> SdaCache:
		'''
		A cache at the default location; there is only one default instance at any time.
		'''
		if cls._default_instance is None:
			cls._default_instance = cls()
		return cls._default_instance

	@property
	def dbFilepath(self) -> pathlib.Path:
		'''
		The path of the SQLite database; recreated if it was deleted during the run of a program.
		'''
		if self._dbFilepath.exists():
			if self._dbFilepath.stat().st_size == 0: # size in bytes
				self._dbFilepath.unlink()
				self._initialize_database()
		else:
			self._initialize_database()
		return self._dbFilepath

	@property
	def path(self) -> pathlib.Path:
		'''
		The directory holding the database.
		'''
		return self._dbFilepath.parent

	def _initialize_database(self):
		'''
		Make the initial connection to the database, creating file/schema as needed.
		'''
		is_new_database = not self._dbFilepath.exists()
		try:
			connection = sqlite3.connect(self._dbFilepath, timeout=20)
		except sqlite3.OperationalError as e:
			if is_new_database:
				raise OSError(f"Unable to create database at specified path ('{self._dbFilepath}'): {e}")
			else:
				raise OSError(f"Found file at path '{self._dbFilepath}', but am unable to open as an SQLite database: {e}")

		with contextlib.closing(connection):
			if is_new_database:
				self._init_sqlite_db(connection)

	def _init_sqlite_db(self, connection:sqlite3.Connection):
		'''
		Create the schema of a new database.
		'''
		with contextlib.closing(connection.cursor()) as cursor:
			cursor.execute('''
				CREATE TABLE IF NOT EXISTS metadata (
					id INTEGER PRIMARY KEY,
					date_created DATE,
					database_version INTEGER
				);''')
			cursor.execute(''' INSERT OR IGNORE INTO metadata (id, date_created, database_version) VALUES (1, CURRENT_TIMESTAMP, 1); ''')
			cursor.execute('''
				CREATE TABLE IF NOT EXISTS cache (
					id INTEGER PRIMARY KEY AUTOINCREMENT,
					key TEXT UNIQUE,
					value TEXT
				);''')
			connection.commit()

	@staticmethod
	def key(room_digest:str, schedule_digest:str, model_name:str, pattern_bits:str) -> str:
		return f"{room_digest}:{schedule_digest}:{model_name}:{pattern_bits}"

	def __contains__(self, key) -> bool:
		try:
			self[key]
		except KeyError:
			return False
		return True

	def __getitem__(self, key) -> dict:
		'''
		The cache is made to look like a key/value store.
		'''
		# read-only connection through the URI form
		with contextlib.closing(sqlite3.connect(f"file:{self.dbFilepath}?mode=ro", uri=True, timeout=30)) as connection:
			with contextlib.closing(connection.cursor()) as cursor:
				value = cursor.execute("SELECT value FROM cache WHERE key=?", (key,)).fetchone()
				if value is None:
					raise KeyError(key)
				return json.loads(value[0])

	def __setitem__(self, key, value:dict):
		# isolation_level=None puts the connection in autocommit mode
		with contextlib.closing(sqlite3.connect(self.dbFilepath, isolation_level=None, timeout=30)) as connection:
			with contextlib.closing(connection.cursor()) as cursor:
				cursor.execute('pragma journal_mode=wal')
				cursor.execute("REPLACE INTO cache (key, value) VALUES (?,?);", (key, json.dumps(value)))

	def __len__(self) -> int:
		with contextlib.closing(sqlite3.connect(self.dbFilepath, timeout=30)) as connection:
			return connection.execute("SELECT COUNT(*) FROM cache").fetchone()[0]

	def clear(self):
		with contextlib.closing(sqlite3.connect(self.dbFilepath, isolation_level=None, timeout=30)) as connection:
			connection.execute("DELETE FROM cache")
