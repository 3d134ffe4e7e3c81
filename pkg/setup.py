import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "embedhalluc._ckernels",
                sources=["src/embedhalluc/_ckernels.pyx"],
                extra_compile_args=["-O3"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )
except ImportError:
    # Without Cython the package still installs; the numpy kernel
    # backend is selected at import time.
    ext_modules = []

setup(ext_modules=ext_modules)
