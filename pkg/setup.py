"""Build the optional GMP kernel; the package works without it."""

import os
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler or headers missing
            print(f"warning: compiled kernel not built ({exc}); using pure Python", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: failed to build {ext.name} ({exc}); using pure Python", file=sys.stderr)


def extensions():
    if os.environ.get("PARTHETA_NO_EXTENSION"):
        return []
    try:
        import gmpy2
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "partheta._kernel",
        ["src/partheta/_kernel.pyx"],
        include_dirs=[os.path.dirname(gmpy2.__file__)],
        libraries=["gmp"],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"}, quiet=True)


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
