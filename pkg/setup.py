import re

import yaml
from setuptools import setup

with open("environment.yml", 'r') as stream:
    out = yaml.safe_load(stream)
    requirements = out['dependencies'][1:]  # we do not return python

with open("pymultiband/__init__.py") as stream:
    version = re.search(r'__version__ = "(.*)"', stream.read()).group(1)

setup(
    name='pymultiband',
    version=version,
    description="Multiband WDM launch-power simulation and optimisation under inter-channel Raman scattering",
    license='Apache 2.0',
    packages=['pymultiband'],
    package_data={'pymultiband': ['scenarios/*.yml', 'scenarios/*.md']},
    install_requires=requirements,
    entry_points={'console_scripts': ['pymultiband = pymultiband.cli:main']},
    keywords='pymultiband',
    classifiers=[
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
    ]
)
