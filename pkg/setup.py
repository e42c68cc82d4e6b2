"""Build script for the compiled QCLP kernel.

The package is fully functional without the extension (a numpy fallback is
selected at import time); building it just makes the integration solver's
inner loop much faster on small problems.
"""

import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        name="viewguard._qclp",
        sources=["src/viewguard/_qclp.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
]

setup(ext_modules=cythonize(extensions, language_level="3"))
