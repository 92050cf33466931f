# Copyright (c) 2023-2026 The kremu developers
# Part of kremu, released under the BSD 2-Clause License.

"""Global pytest options."""

pytest_plugins = ("kremu.pytest_plugin_validate",)
