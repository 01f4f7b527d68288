# -*- coding: utf-8 -*-

# Learn more: https://github.com/kennethreitz/setup.py

from setuptools import setup, find_packages


with open("README.rst") as f:
    readme = f.read()

with open("LICENSE") as f:
    license = f.read()

setup(
    name="cavitytally",
    version="0.1.0",
    description="Atom counting from the transmission spectrum of atoms trapped in an optical cavity",
    long_description=readme,
    license=license,
    python_requires=">=3.11",
    install_requires=["numpy", "scipy"],
    packages=find_packages(exclude=("tests", "docs")),
    entry_points={
        "console_scripts": ["cavitytally=cavitytally.cli:run"],
    },
)
