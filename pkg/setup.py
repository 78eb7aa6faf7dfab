import os
from setuptools import setup, find_packages

HERE = os.path.dirname(os.path.abspath(__file__))


def _version():
  scope = {}
  with open(os.path.join(HERE, "skdv_lab", "_version.py")) as f:
    exec(f.read(), scope)
  return scope["__version__"]


def _parse_requirements():
  with open(os.path.join(HERE, "requirements.txt")) as f:
    return [line for line in f.read().splitlines() if line]


setup(name="skdv-lab",
      version=_version(),
      description="Numerical lab for the Schrodinger-KdV system on half-lines.",
      long_description=open(os.path.join(HERE, "README.md")).read(),
      long_description_content_type="text/markdown",
      packages=find_packages(),
      python_requires=">=3.7",
      license="Apache 2.0",
      entry_points={"console_scripts": ["skdv-lab=skdv_lab.cli:main"]},
      install_requires=_parse_requirements(),
      classifiers=["Programming Language :: Python :: 3"])
