# Copyright (c) 2023-2026 The kremu developers
# Part of kremu, released under the BSD 2-Clause License.

from setuptools import setup
import os

# Read README for PyPI, fallback to short description if it fails.
desc = 'Kernel regression emulators of gridded climate scenarios.'
try:
    readme_file = os.path.join(os.path.dirname(os.path.abspath(__file__)),
                               'README.md')
    with open(readme_file) as f:
        readme = f.read()
except OSError:
    readme = desc

version = {}
with open(os.path.join(os.path.dirname(os.path.abspath(__file__)), 'kremu',
                       'version.py')) as f:
    exec(f.read(), version)

setup(name='kremu',
      version=version['__version__'],
      description=desc,
      long_description=readme,
      long_description_content_type='text/markdown',
      license='BSD - 2 clause',
      author='The kremu developers',
      classifiers=[
          "Development Status :: 4 - Beta",
          "Intended Audience :: Science/Research",
          'Operating System :: MacOS :: MacOS X',
          'Operating System :: POSIX',
          "License :: OSI Approved :: BSD License",
          "Topic :: Scientific/Engineering :: Atmospheric Science",
          ],

      install_requires=['numpy>=1.17'],
      python_requires='>=3.8',
      packages=['kremu', 'kremu.test'],
      package_data={'kremu.test': ['pytest.ini']},
      entry_points={
          'console_scripts': [
              'kremu = kremu.__main__:main',
          ],
      }
      )
