import sys
import os
from setuptools import setup, find_packages

sys.dont_write_bytecode = True

here = os.path.dirname(os.path.realpath(__file__))
with open(os.path.join(here, "sgpivot", "__version__.py"), "r") as f:
    version_info = {}
    exec(f.read(), version_info)
release_version = version_info["release_version"]

pkgs = [pkg for pkg in find_packages() if pkg.startswith("sgpivot")]

pkg_data = {
    "sgpivot": ["parameter_default.yml", "parameters.yml"],
    "sgpivot.scene_graph": ["toy_grammar.yml"],
}
loose_modules = ["__version__", "parameters"]


if __name__ == "__main__":
    setup(
        name="sgpivot",
        version=release_version,
        install_requires=["numpy", "scipy", "pyaml"],
        extras_require={"qt": ["PyQt5"]},
        packages=pkgs,
        package_dir={"": "."},
        py_modules=loose_modules,
        package_data=pkg_data,
        zip_safe=False,
        description="Scene-graph pivoted unsupervised multimodal machine translation at desk scale",
        classifiers=[
            "Programming Language :: Python",
            "Programming Language :: Python :: 3.6",
            "Programming Language :: Python :: 3.7",
            "Programming Language :: Python :: 3.8",
        ],
        entry_points={"console_scripts": ["sgpivot=sgpivot.harness.cli:main"]},
    )
