#!/usr/bin/env python3
"""
Setup script for the flag Leray-Hirsch toolkit
"""

from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

with open("requirements.txt", "r", encoding="utf-8") as fh:
    requirements = [
        line.split("#")[0].strip()
        for line in fh
        if line.split("#")[0].strip() and not line.startswith("#")
    ]

setup(
    name="flag-leray-hirsch",
    version="1.0.0",
    author="flaglh developers",
    description="Leray-Hirsch matrices for equivariant oriented cohomology of flag varieties",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["examples", "examples.*"]),
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
    ],
    python_requires=">=3.8",
    install_requires=[r for r in requirements if not r.startswith(("pytest", "black", "flake8"))],
    extras_require={
        "dev": [
            "pytest>=6.0.0",
            "black>=21.0.0",
            "flake8>=3.9.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "flaglh=flaglh.cli:main",
        ],
    },
)
