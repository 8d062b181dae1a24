"""Build script for the optional compiled kernel extension.

The package works without the extension (a pure-Python twin is selected
at import time), so the extension is marked optional: a missing compiler
downgrades the install instead of failing it.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "condel._native._kernels",
                ["src/condel/_native/_kernels.pyx"],
                # -ffp-contract=off keeps float results bit-identical to the
                # pure-Python twin (no fused multiply-add reassociation).
                extra_compile_args=["-O2", "-ffp-contract=off"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
