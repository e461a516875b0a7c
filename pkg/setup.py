from setuptools import Extension, setup

# The compiled kernel is optional: the package falls back to the pure-Python
# implementation in bcnf._kernel_py when the extension is unavailable.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "bcnf._kernel",
                ["src/bcnf/_kernel.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
