"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (a pure-Python kernel module with
identical semantics is selected at import time), so a missing compiler or
Cython only costs speed, not correctness.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "polymerlab.backends._speedups",
                ["src/polymerlab/backends/_speedups.pyx"],
                # -ffp-contract=off: no FMA contraction, so compiled results
                # are bit-identical to the pure-Python kernel.
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    print("Cython not available; building without the compiled kernel")

setup(ext_modules=ext_modules)
