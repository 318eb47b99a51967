#!/usr/bin/env python
"""
Setup for the unshuffle
"""
from setuptools import setup

from unshuffle import __version__ as ver


setup(name='unshuffle',
      packages=['unshuffle'],
      version=ver,
      description='Unlabeled sensing with power-sum polynomial systems',
      keywords=['unlabeled sensing', 'shuffled regression', 'power sums',
                'groebner basis', 'resultant'],
      install_requires=['numpy', 'scipy', 'sympy>=1.9'],
      python_requires='>=3.8',
      entry_points={'console_scripts':
                    ['unshuffle = unshuffle.cmd_unshuffle:main']},
      classifiers=['Programming Language :: Python :: 3',
                   'Programming Language :: Python :: 3.8',
                   'Development Status :: 4 - Beta',
                   'Environment :: Console',
                   'Intended Audience :: Science/Research',
                   'License :: OSI Approved :: BSD License',
                   'Operating System :: OS Independent',
                   'Topic :: Scientific/Engineering :: Mathematics'],
      long_description=open('README.rst').read(),
      options={'test': {'verbose': False,
                        'coverage': False}})
