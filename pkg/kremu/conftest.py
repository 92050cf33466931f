# Copyright (c) 2023-2026 The kremu developers
# Part of kremu, released under the BSD 2-Clause License.

"""Global pytest options.

The ``kremu.pytest_plugin_validate`` plugin is registered from the
top-level ``conftest.py`` (pytest only honours ``pytest_plugins`` there).
"""
