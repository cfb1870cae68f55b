#!/usr/bin/python

''' Small decorators used across the package. '''

import functools
import collections.abc

import numpy as np

def _freeze(value):
	''' Mark arrays (also inside tuples) read-only so cached results cannot be modified by callers. '''
	if isinstance(value, np.ndarray):
		value.setflags(write=False)
	elif isinstance(value, tuple):
		for item in value:
			_freeze(item)
	return value

class memoize(object):
	'''
	Decorator. Caches a function's return value per argument tuple.

	Arrays in the returned value are made read-only; memoized functions
	must otherwise return immutable values (tuples, frozen dataclasses).
	Calls with unhashable arguments are passed through uncached.
	'''
	def __init__(self, func):
		self.func = func
		self.cache = {}
		functools.update_wrapper(self, func)

	def __call__(self, *args):
		if not all(isinstance(a, collections.abc.Hashable) for a in args):
			return self.func(*args)
		try:
			return self.cache[args]
		except KeyError:
			value = self.cache[args] = _freeze(self.func(*args))
			return value

	def __repr__(self):
		return f"<memoize {self.func.__qualname__} ({len(self.cache)} cached)>"

	def cacheClear(self):
		''' Drop every cached value. '''
		self.cache.clear()
