"""Build script: compiles the optional accelerator extension when Cython and a
C compiler are available, and falls back to the pure-Python integrators
otherwise.  Installation never fails because of a missing toolchain."""

import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


def _extensions():
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        return []
    from setuptools import Extension

    ext = Extension(
        "effparam._speedups",
        ["src/effparam/_speedups.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level=3)


class optional_build_ext(build_ext):
    """Build the accelerator if possible; warn and continue if not."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing or broken
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            "WARNING: building the compiled integrator core failed; "
            "the pure-Python fallback will be used.\n  reason: %s" % exc,
            file=sys.stderr,
        )


setup(
    ext_modules=_extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
