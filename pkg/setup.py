from setuptools import find_packages, setup

from config.settings import APP_DESCRIPTION, APP_NAME, VERSION

setup(
    name=APP_NAME,
    version=VERSION,
    description=APP_DESCRIPTION,
    packages=find_packages(exclude=("tests", "tests.*")),
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.24",
        "scipy>=1.10",
        "matplotlib>=3.7",
    ],
    extras_require={
        "dev": ["pytest>=7.4", "pytest-cov>=4.1", "hypothesis>=6.80", "black>=23.7", "flake8>=6.0"],
    },
    entry_points={
        "console_scripts": [
            "cappa-bench=src.main:main",
        ],
    },
)
