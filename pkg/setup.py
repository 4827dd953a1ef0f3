"""Build script. The compiled distance kernels are optional: if Cython or a C
compiler is unavailable the package installs without them and falls back to
the numpy kernels at import time."""

from setuptools import setup
from setuptools.command.build_ext import build_ext


def extensions():
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    ext = Extension(
        "rdlp._kernels._distc",
        ["src/rdlp/_kernels/_distc.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


class optional_build_ext(build_ext):
    """Never fail the install because the extension would not compile."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, broken toolchain
            print(f"skipping compiled kernels ({exc}); numpy fallback will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"skipping {ext.name} ({exc}); numpy fallback will be used")


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})
