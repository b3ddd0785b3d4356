"""Build the optional Cython kernels; the package falls back to numpy without them."""

import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None


def extensions():
    if cythonize is None or os.environ.get("NLMSR_NO_EXT"):
        return []
    ext = Extension(
        "nlmsr._kernels",
        ["src/nlmsr/_kernels.pyx"],
        # no -ffast-math / -march: keep IEEE semantics and no FMA contraction
        extra_compile_args=["-O3", "-fopenmp", "-ffp-contract=off"],
        extra_link_args=["-fopenmp"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions())
