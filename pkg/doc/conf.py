#!/usr/bin/env python3
# Copyright (c) 2023-2026 The kremu developers
# Part of kremu, released under the BSD 2-Clause License.

import datetime

import kremu

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.napoleon',
    'sphinx.ext.intersphinx',
    'sphinx.ext.mathjax',
]

napoleon_include_special_with_doc = True

intersphinx_mapping = {'python': ('https://docs.python.org/3', None),
                       'numpy': ('https://numpy.org/doc/stable', None)}
autodoc_docstring_signature = True

templates_path = ['_templates']

source_suffix = '.rst'

master_doc = 'index'

project = 'kremu'
year = datetime.date.today().year
copyright = f'2023-{ year } The kremu developers'

version = kremu.__version__
release = version

exclude_patterns = ['_build']

default_role = 'any'

pygments_style = 'sphinx'

html_theme = 'sphinx_rtd_theme'
