"""
Setup file for Fermi Thermometry (optional - for package installation).
"""

from setuptools import setup, find_packages

setup(
    name="fermi-thermometry",
    version="0.1.0",
    description="Temperature estimation with fermionic probes strongly coupled to a fermionic bath",
    author="",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    install_requires=[
        "numpy>=1.24.0",
        "scipy>=1.10.0",
        "pandas>=2.0.0",
    ],
    entry_points={
        "console_scripts": [
            "fermi-thermometry=fermi_thermometry.main:main",
        ],
    },
    python_requires=">=3.8",
)
