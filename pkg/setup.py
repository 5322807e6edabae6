import sys

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "canonsys._transfer",
                ["src/canonsys/_transfer.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-env dependent
    print(f"canonsys: building without compiled kernel ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)
