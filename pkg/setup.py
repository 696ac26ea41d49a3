import re

from setuptools import find_packages, setup

with open('jqc/__init__.py', encoding='utf-8') as f:
    __version__ = re.search(r"__version__ = '([^']+)'", f.read()).group(1)

setup(
    name='jqc',
    version=__version__,
    description='Jastrow-projected quantum-circuit states: state-vector and entangled-copy sampling experiments',
    packages=find_packages(exclude=('tests', 'tests.*')),
    python_requires='>=3.10',
    install_requires=[
        'numpy>=1.24,<2',
        'scipy>=1.11',
        'python-dotenv>=1.0',
        'click>=8.1',
    ],
    extras_require={
        'test': ['pytest>=8', 'hypothesis>=6.100'],
    },
    entry_points={
        'console_scripts': ['jqc=jqc.experiments.cli:cli'],
    },
)
