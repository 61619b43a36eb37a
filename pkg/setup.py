"""Build script for the optional compiled kernel core.

The package is fully functional without the extension; if Cython or a C
compiler is missing, installation falls back to the pure numpy kernels.
"""

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the Cython core if possible, otherwise install pure-Python."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, cython missing, ...
            print(f"WARNING: compiled kernels not built ({exc}); "
                  "falling back to pure numpy kernels")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"WARNING: failed to build {ext.name} ({exc}); "
                  "falling back to pure numpy kernels")


def _extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    from setuptools import Extension
    return cythonize(
        [
            Extension(
                "elliptrack._kernels._core",
                sources=["src/elliptrack/_kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                # -ffp-contract=off: fused multiply-adds would break bit parity
                # with the numpy fallback kernels
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )


setup(
    ext_modules=_extensions(),
    cmdclass={"build_ext": OptionalBuildExt},
)
