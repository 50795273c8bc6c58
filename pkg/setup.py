import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

# No -ffast-math / -march=native: the compiled kernels must keep strict IEEE
# semantics so their output is bit-identical to the pure-numpy fallback.
kernels = Extension(
    "texnoise._kernels",
    ["src/texnoise/_kernels.pyx"],
    include_dirs=[numpy.get_include()],
    extra_compile_args=["-O3"],
)

setup(ext_modules=cythonize([kernels], language_level="3"))
