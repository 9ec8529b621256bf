"""Build script for the optional compiled kernels.

The package works without the extension (a numpy fallback is selected at
import); a failed compile therefore only warns instead of aborting the
install.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler / headers
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            f"warning: compiled kernels not built ({exc}); "
            "falling back to the pure-python backend",
            file=sys.stderr,
        )


def _extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError as exc:
        print(f"warning: {exc}; skipping compiled kernels", file=sys.stderr)
        return []
    ext = Extension(
        "boxhash._kernels",
        ["src/boxhash/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        language="c++",
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=_extensions(), cmdclass={"build_ext": optional_build_ext})
