from setuptools import setup
from setuptools.extension import Extension

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "pncinterp._kernels._speedups",
                ["src/pncinterp/_kernels/_speedups.pyx"],
                language="c++",
            )
        ],
        compiler_directives={"language_level": 3},
    )
except ImportError:
    # The package falls back to the pure-Python kernels at import time.
    extensions = []

setup(ext_modules=extensions)
