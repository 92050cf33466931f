# Copyright (c) 2023-2026 The kremu developers
# Part of kremu, released under the BSD 2-Clause License.

"""Benchmark kremu emulator fit and predict times."""

import sys
import time

from kremu.config import RunConfig
from kremu.data import synth_scenarios
from kremu.emulator import Emulator

# import logging
# logging.basicConfig(level=logging.DEBUG)


def run_benchmarks(model, n_years, grid, jobs):
    """Time one fit and one predict."""
    scenarios = synth_scenarios(0, n_scenarios=4, n_years=n_years,
                                n_lat=grid[0], n_lon=grid[1])
    config = RunConfig(model=model, variables='tas, pr', jobs=jobs)

    timings = {}
    start = time.time()
    emulator = Emulator(config).fit(scenarios[:3])
    end = time.time()
    timings['fit'] = end - start

    start = time.time()
    emulator.predict(scenarios[3])
    end = time.time()
    timings['predict'] = (end - start) / 1e-3
    return timings


def run_sweep(n_years, jobs):
    """Run a single sweep of benchmarks."""
    for grid in ((8, 16), (32, 64)):
        for model in ('gpr', 'svr', 'krr'):
            result = run_benchmarks(model, n_years, grid, jobs)
            print("{0:<6} {1:<7} {2:<6} {3:<5} {4:<9.4g} {5:<12.4g}".format(
                model, str(grid[0]) + 'x' + str(grid[1]), n_years, jobs,
                result['fit'], result['predict']))
            sys.stdout.flush()


print("""
====== ======= ====== ===== ========= ============
Model  Grid    Years  Jobs  Fit (s)   Predict (ms)
====== ======= ====== ===== ========= ============""")

run_sweep(50, 1)
run_sweep(86, 1)
run_sweep(86, 4)

print("====== ======= ====== ===== ========= ============")
