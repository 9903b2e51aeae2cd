#!/usr/bin/env python3

from setuptools import setup
from setuptools import find_packages


with open("README.md", "r", encoding="utf-8") as fp:
    long_description = fp.read()


setup(
    name                          = "capc",
    description                   = "Cap: a small functional language with path-dependent capabilities",
    long_description              = long_description,
    long_description_content_type = "text/markdown",
    author                        = "Cap Developers",
    license                       = "BSD",
    python_requires               = ">=3.10",
    install_requires              = ["lark", "pydantic>=2"],
    include_package_data          = True,
    package_data                  = {
        "capc.syntax"  : ["*.lark"],
        "capc.prelude" : ["*.cap"],
    },
    keywords                      = "capabilities typestate effects type-system interpreter",
    classifiers                   = [
        "Topic :: Software Development :: Compilers",
        "Environment :: Console",
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Developers",
        "License :: OSI Approved :: BSD License",
        "Operating System :: OS Independent",
        "Programming Language :: Python",
    ],
    packages                      = find_packages(exclude=['test*']),
    entry_points                  = {
        "console_scripts": ["capc=capc.cli:main"],
    },
)
