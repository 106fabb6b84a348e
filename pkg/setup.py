#!/usr/bin/env python

import os

from setuptools import setup, find_packages

this_directory = os.path.abspath(os.path.dirname(__file__))

__version__ = None
with open(os.path.join(this_directory, "n2sid", "__version__.py"), "r", encoding="utf-8") as f:
    exec(f.read())
with open(os.path.join(this_directory, "README.md"), "r", encoding="utf-8") as f:
    readme = f.read()


setup(
    name="n2sid",
    version=__version__,
    description="nuclear norm subspace identification of linear state-space models",
    keywords="system identification, subspace identification, nuclear norm, ADMM",
    long_description_content_type="text/markdown",
    long_description=readme,
    author="N2SID developers",
    license="BSD 3-Clause",
    packages=find_packages(exclude=["tests", "tests.*"]),
    install_requires=[
        "matplotlib>=3.5.2,<3.9",
        "numpy>=1.19.0",
        "scipy>=1.7.3",
        "omegaconf>=2.1.1",
        "cvxpy>=1.3.0",
        "tqdm>=4.65.0",
        "pytest>=7.4.0",
    ],
    extras_require={
        "test": ["hypothesis>=6.0.0"],
    },
    entry_points={
        "console_scripts": ["n2sid = n2sid.cli:main"],
    },
    classifiers=[
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "License :: OSI Approved :: BSD License",
        "Operating System :: POSIX :: Linux",
    ],
    include_package_data=True,
    package_data={"": ["*.yaml"]},
)
