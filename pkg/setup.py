"""Build script for the optional compiled kernel extension.

The package is pure Python plus one optional Cython extension,
``isohull._kernels_c``, holding the scalar/batch numerical kernels.  If
Cython or a C compiler is unavailable the install proceeds without the
extension and the package falls back to ``isohull._kernels_py`` at import
time (see ``isohull._backend``).
"""

import warnings

from setuptools import setup
from setuptools.command.build_ext import build_ext


ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("isohull._kernels_c", ["src/isohull/_kernels_c.pyx"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    warnings.warn("Cython not available; installing with pure-Python kernels only.")


class OptionalBuildExt(build_ext):
    """Build the extension if possible, otherwise continue without it."""

    def run(self):
        try:
            build_ext.run(self)
        except Exception as exc:  # compiler missing / broken toolchain
            warnings.warn(f"Could not build compiled kernels ({exc}); "
                          "falling back to pure-Python kernels.")

    def build_extension(self, ext):
        try:
            build_ext.build_extension(self, ext)
        except Exception as exc:
            warnings.warn(f"Could not build {ext.name} ({exc}); "
                          "falling back to pure-Python kernels.")


setup(
    ext_modules=ext_modules,
    cmdclass={"build_ext": OptionalBuildExt},
    zip_safe=False,
)
