"""Build the optional compiled scan kernel.

The package works without it; ``lpsmooth._backend`` falls back to NumPy.
Set ``LPSMOOTH_NO_EXT=1`` to skip the extension entirely.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("LPSMOOTH_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension("lpsmooth._scan", ["src/lpsmooth/_scan.pyx"],
                       include_dirs=[np.get_include()],
                       extra_compile_args=["-O3"],
                       define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")])],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
