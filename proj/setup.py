"""CMake-driven build for the difflab python package.

The extension is compiled by the project's CMakeLists (tests and CLI off) and
installed as difflab/_core. Use `pip install . --no-build-isolation` when the
build prerequisites (cmake, a C++20 compiler, pybind11) are already present.
"""

import os
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        source_dir = Path(__file__).resolve().parent
        build_dir = Path(self.build_temp) / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)

        try:
            import pybind11

            pybind11_dir = pybind11.get_cmake_dir()
        except ImportError:
            pybind11_dir = ""

        cfg_args = [
            "cmake",
            "-S", str(source_dir),
            "-B", str(build_dir),
            "-DCMAKE_BUILD_TYPE=Release",
            "-DDIFFLAB_BUILD_TESTS=OFF",
            "-DDIFFLAB_BUILD_CLI=OFF",
            "-DDIFFLAB_BUILD_PYTHON=ON",
            f"-DPYTHON_EXECUTABLE={sys.executable}",
        ]
        if pybind11_dir:
            cfg_args.append(f"-Dpybind11_DIR={pybind11_dir}")
        subprocess.run(cfg_args, check=True)
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "_core",
             "-j", str(os.cpu_count() or 2)],
            check=True,
        )

        staged = build_dir / "python" / "difflab"
        built = next(staged.glob("_core*"))
        dest = Path(self.get_ext_fullpath(ext.name)).resolve()
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_bytes(built.read_bytes())


setup(
    packages=["difflab"],
    package_dir={"difflab": "python/difflab"},
    ext_modules=[CMakeExtension("difflab._core")],
    cmdclass={"build_ext": CMakeBuild},
)
