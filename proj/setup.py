"""CMake-driven build of the _particle_limits extension.

The CMake project is the source of truth for the native build; this shim just
drives it from pip (`pip install -e . --no-build-isolation`) and drops the
resulting module next to the package.
"""

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
        source_dir = Path(__file__).parent.resolve()
        build_dir = Path(self.build_temp).resolve()
        build_dir.mkdir(parents=True, exist_ok=True)

        out_dir = Path(self.get_ext_fullpath(ext.name)).parent.resolve() / "particle_limits"
        out_dir.mkdir(parents=True, exist_ok=True)

        subprocess.run(
            [
                "cmake",
                "-S", str(source_dir),
                "-B", str(build_dir),
                "-DCMAKE_BUILD_TYPE=Release",
                "-DPARTICLE_LIMITS_BUILD_TESTS=OFF",
                f"-DPython3_EXECUTABLE={sys.executable}",
            ],
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "_particle_limits", "-j"],
            check=True,
        )
        for artifact in (build_dir / "python" / "particle_limits").glob("_particle_limits*"):
            self.copy_file(artifact, out_dir / artifact.name)


setup(
    ext_modules=[CMakeExtension("particle_limits._particle_limits")],
    cmdclass={"build_ext": CMakeBuild},
)
