'''
Sub-seed derivation.

All randomness in the package flows from one master seed. A sub-seed is
derived from the master seed and a path of stream keys (strings or integers)
with :class:`numpy.random.SeedSequence`, so that e.g. the seed of sample 17 of
a dataset does not depend on how many samples were drawn before it.
'''

import zlib
from typing import Union

import numpy as np

SeedKey = Union[int, str]

def _key_to_int(key:SeedKey) -> int:
	if isinstance(key, (int, np.integer)):
		if key < 0:
			raise ValueError(f"Seed stream keys must be non-negative; got {key}.")
		return int(key)
	elif isinstance(key, str):
		return zlib.crc32(key.encode("utf-8"))
	else:
		raise TypeError(f"Seed stream keys must be int or str, not '{type(key)}'.")

def derive_seed(master:int, *keys:SeedKey) -> int:
	'''
	Return a 64-bit sub-seed for the stream identified by ``keys`` under ``master``.

	:param master: the master seed (non-negative integer)
	:param keys: stream path, e.g. ``("shapes", 3, 17)``
	'''
	if master is None:
		raise ValueError("A seed is mandatory; wall-clock seeding is not supported.")
	sequence = np.random.SeedSequence(entropy=int(master), spawn_key=tuple(_key_to_int(k) for k in keys))
	# keep within the signed 64-bit range so seeds survive CSV round trips
	return int(sequence.generate_state(1, dtype=np.uint64)[0]) & 0x7FFFFFFFFFFFFFFF

def rng_for(master:int, *keys:SeedKey) -> np.random.Generator:
	'''
	A :class:`numpy.random.Generator` for the given stream.
	'''
	return np.random.default_rng(derive_seed(master, *keys))
