import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# Compiled hot path for the spectrum scans. The package falls back to the
# pure-numpy implementation at import time if this extension is missing,
# so a failed build is not fatal for functionality (only for speed).
extensions = [
    Extension(
        "irsloc._kernels",
        ["src/irsloc/_kernels.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
]

setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}),
)
