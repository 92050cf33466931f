# Copyright (c) 2023-2026 The kremu developers
# Part of kremu, released under the BSD 2-Clause License.

"""Command line options for pytest.

Validation tests repeat a statistical check over many seeds or run the
full size synthetic benchmark. They are marked ``validate`` and skipped
unless ``--validate`` is given::

    pytest --pyargs kremu -p kremu.pytest_plugin_validate --validate \\
        --validate-seeds 200
"""

import pytest

DEFAULT_SEEDS = 50


def pytest_addoption(parser):
    """Add kremu specific options to the pytest command line.

    * validate - run the validation tests
    * validate-seeds - number of seeds of the Monte Carlo validations
    """
    group = parser.getgroup('kremu')
    group.addoption(
        "--validate",
        action="store_true",
        default=False,
        help="Enable long running emulator benchmark validations.",
    )
    group.addoption(
        "--validate-seeds",
        dest="validate_seeds",
        type=int,
        default=DEFAULT_SEEDS,
        help="Seeds per Monte Carlo validation (default %d)." % DEFAULT_SEEDS,
    )


@pytest.fixture(autouse=True)
def skip_validate(request):
    """Skip validation tests unless --validate is given."""
    if request.node.get_closest_marker('validate') \
            and not request.config.getoption("validate"):
        pytest.skip('Validation tests not requested.')


@pytest.fixture
def validate_seeds(request):
    """Seeds of a Monte Carlo validation, ``range(--validate-seeds)``."""
    n = request.config.getoption("validate_seeds")
    if n < 1:
        raise pytest.UsageError('--validate-seeds must be >= 1')
    return range(n)


def pytest_configure(config):
    """Define the ``validate`` marker."""
    config.addinivalue_line(
        "markers",
        "validate: Long running benchmarks on full size synthetic data.")


def pytest_report_header(config):
    """Report whether validations run."""
    if config.getoption("validate"):
        return ('kremu validations enabled, '
                + str(config.getoption("validate_seeds")) + ' seeds')
    return None
