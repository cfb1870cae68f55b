
# ==================== gdl =====================

import setuptools
from setuptools import setup

data_files = []

description = ("Generative design of building shapes and daylit facades: synthetic datasets, "
               "a numpy CNN and conditional GAN, and an sDA surrogate.")

try:
	with open('HISTORY.rst') as history_file:
		history = history_file.read()
except FileNotFoundError:
	history = ""

try:
	with open('README.rst') as readme_file:
		readme = readme_file.read()
except FileNotFoundError:
	readme = ""

long_description = f"{readme}\n\n{history}"

# list of classifiers: https://pypi.org/classifiers/
classifiers = [
    "Development Status :: 3 - Alpha",
    "Topic :: Scientific/Engineering :: Artificial Intelligence",
    "Intended Audience :: Science/Research"
]

install_requires = [
	"numpy>=1.20",
	"astropy>=4.2.1",
	"coloredlogs>=15.0",
	"Pillow>=9.1",
	"opencv-python-headless>=4.5",
	"tqdm>=4.60",
]

exec(open('gdl/core/version.py').read())
setup(
	name = "gdl_core",
	version = __version__,
	description = description,
	long_description = long_description,
	classifiers = classifiers,
	packages=setuptools.find_namespace_packages(include=[f"gdl.*"]), # gdl uses native namespaces; see: https://packaging.python.org/guides/packaging-namespace-packages/#native-namespace-packages
	install_requires=install_requires,
	entry_points={"console_scripts": ["gdl=gdl.core.cli:main"]},
	zip_safe=False,
	data_files=data_files,
	python_requires='>=3.7'
)
