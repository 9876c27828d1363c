from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
    import numpy as np

    ext_modules = cythonize(
        [
            Extension(
                "explab._kernels",
                ["src/explab/_kernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # No Cython toolchain: install pure-Python only, the numpy
    # fallback kernels are selected at import time.
    ext_modules = []

setup(ext_modules=ext_modules)
