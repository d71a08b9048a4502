from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

# The compiled core is optional: emwalk falls back to the numpy/scipy
# implementation at import time when the extension is missing.
ext = Extension("emwalk._core", ["src/emwalk/_core.pyx"], optional=True)

setup(ext_modules=cythonize([ext], language_level="3") if cythonize else [])
