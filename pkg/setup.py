import numpy as np
from setuptools import setup
from Cython.Build import cythonize

setup(
    ext_modules=cythonize(
        ["src/samic/kernels/_heatcore.pyx"],
        compiler_directives={"language_level": 3, "boundscheck": False, "wraparound": False},
    ),
    include_dirs=[np.get_include()],
)
