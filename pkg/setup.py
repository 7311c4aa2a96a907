"""Build script for the optional compiled integrator kernel.

The package works without the extension (a pure-Python kernel is selected
at import time), so the build is marked optional and any compile failure
degrades gracefully to the fallback.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext = Extension(
        "qubesim._kernels._cyfast",
        ["src/qubesim/_kernels/_cyfast.pyx"],
        # -ffp-contract=off keeps the C kernel bit-identical to the
        # pure-Python kernel (no FMA contraction).
        extra_compile_args=["-O2", "-ffp-contract=off"],
        optional=True,
    )
    ext_modules = cythonize([ext], language_level="3")

setup(ext_modules=ext_modules)
