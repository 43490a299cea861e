"""Optional compiled kernels; the package works without them."""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(["src/diogame/_kernels.pyx"], quiet=True)
except ImportError:
    pass

setup(ext_modules=ext_modules)
