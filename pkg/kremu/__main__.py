# Copyright (c) 2023-2026 The kremu developers
# Part of kremu, released under the BSD 2-Clause License.

"""The kremu command line interface.

The ``kremu`` command wires the package together. A typical session generates
synthetic scenarios, benchmarks the three regressors on them and exports a
difference map::

    $ kremu synth --seed 7 --scenarios 4 --grid 8x16 --out runs/synth
    $ kremu benchmark --data runs/synth --csv runs/table.csv
    $ kremu train --model gpr --data runs/synth/scenario0.cbx \\
          runs/synth/scenario1.cbx --out runs/gpr.krb
    $ kremu predict --model-file runs/gpr.krb \\
          --data runs/synth/scenario3.cbx --out runs/pred.cbx
    $ kremu export-grid --in runs/pred.cbx --variable tas --year 2100 \\
          --minus runs/synth/scenario3.cbx --format pgm --out diff.pgm

Subcommands:

.. program:: kremu

.. option:: synth

    Write seeded synthetic scenarios as CBX files plus ``manifest.txt``.

.. option:: train

    Fit an emulator on CBX files and save a model bundle.

.. option:: predict

    Predict the outputs of a CBX file with a model bundle.

.. option:: evaluate

    Print the lead-time RMSE table of a prediction against the truth.

.. option:: benchmark

    Train and evaluate GPR, SVR and KRR on a manifest's train/test split.

.. option:: export-grid

    Export one field as a PGM image or CSV text.

Exit status is 0 on success, 2 for invalid usage or input, 3 for file errors,
4 for numerical failures and 1 otherwise.
"""

import argparse
import logging
import os
import sys

from . import cbx, evaluate, export
from .config import RunConfig
from .data import synth_scenarios
from .emulator import Emulator, UnsupportedOperation
from .numerics import NumericalError
from .version import __version__

logger = logging.getLogger('kremu.cli')

MANIFEST = 'manifest.txt'


def _print_err(msg=None, *args):
    print(msg, *args, file=sys.stderr)


def _grid(text):
    try:
        n_lat, n_lon = (int(v) for v in text.lower().split('x'))
    except ValueError:
        raise argparse.ArgumentTypeError('grid must be HxW, e.g. 8x16, got '
                                         + repr(text)) from None
    if n_lat < 1 or n_lon < 1:
        raise argparse.ArgumentTypeError('grid dimensions must be >= 1')
    return n_lat, n_lon


def write_manifest(path, values):
    """Write ``key = value`` lines."""
    with open(path, 'w', newline='') as f:
        for key, value in values.items():
            f.write(key + ' = ' + str(value) + '\n')


def read_manifest(path):
    """Read ``key = value`` lines written by `write_manifest`."""
    values = {}
    with open(path, 'r') as f:
        for line in f:
            line = line.split('#', 1)[0].strip()
            if line:
                key, _, value = line.partition('=')
                values[key.strip()] = value.strip()
    return values


def main_synth(args):
    """Generate synthetic scenarios."""
    n_lat, n_lon = args.grid
    scenarios = synth_scenarios(args.seed,
                                n_scenarios=args.scenarios,
                                n_years=args.years,
                                n_lat=n_lat,
                                n_lon=n_lon,
                                noise=args.noise,
                                linear=args.linear)
    os.makedirs(args.out, exist_ok=True)
    files = []
    for d in scenarios:
        name = d.name + '.cbx'
        cbx.write(d, os.path.join(args.out, name))
        files.append(name)

    write_manifest(
        os.path.join(args.out, MANIFEST), {
            'seed': args.seed,
            'scenarios': args.scenarios,
            'years': args.years,
            'grid': str(n_lat) + 'x' + str(n_lon),
            'noise': repr(args.noise),
            'linear': 'true' if args.linear else 'false',
            'files': ','.join(files),
            'train': ','.join(files[:-1] if len(files) > 1 else files),
            'test': files[-1],
        })


def _config(args):
    """Build the run configuration: file values, then explicit flags."""
    if getattr(args, 'config', None):
        config = RunConfig.from_file(args.config)
    else:
        config = RunConfig()
    overrides = {
        key: getattr(args, key, None)
        for key in ('model', 'models', 'kernel', 'noise', 'lam', 'epsilon',
                    'c', 'tol', 'max_iter', 'eof_k', 'feature_mode',
                    'feature_k', 'variables', 'seed', 'jobs')
    }
    if getattr(args, 'cv', False):
        overrides['cv'] = True
    if getattr(args, 'unweighted', False):
        overrides['area_weighted'] = False
    return config.update(**overrides)


def main_train(args):
    """Train an emulator and save the model bundle."""
    config = _config(args)
    datasets = [cbx.read(path) for path in args.data]
    Emulator(config).fit(datasets).save(args.out)


def main_predict(args):
    """Predict outputs with a saved emulator."""
    emulator = Emulator.load(args.model_file)
    if args.with_variance and emulator.config.model != 'gpr':
        raise UnsupportedOperation('--with-variance needs a gpr model, not '
                                   + emulator.config.model)
    d = cbx.read(args.data)
    cbx.write(emulator.predict(d), args.out)
    if args.with_variance:
        stem, ext = os.path.splitext(args.out)
        path = args.variance_out or stem + '_variance' + (ext or '.cbx')
        cbx.write(emulator.predict_variance(d), path)


def main_evaluate(args):
    """Print the RMSE table of a prediction."""
    pred = cbx.read(args.pred)
    truth = cbx.read(args.truth)
    report = evaluate.evaluate(pred,
                               truth,
                               variables=args.variables,
                               windows=evaluate.parse_windows(args.windows),
                               area_weighted=not args.unweighted,
                               model=args.label)
    print(report.to_table(), end='')
    if args.csv:
        report.write_csv(args.csv)


def main_benchmark(args):
    """Benchmark the regressors on a manifest's train/test split."""
    manifest_path = os.path.join(args.data, MANIFEST)
    if os.path.exists(manifest_path):
        manifest = read_manifest(manifest_path)
        train_files = [f for f in manifest.get('train', '').split(',') if f]
        test_file = manifest.get('test', '')
    else:
        files = sorted(f for f in os.listdir(args.data) if f.endswith('.cbx'))
        train_files, test_file = files[:-1], (files[-1] if files else '')
    if not train_files or not test_file:
        raise ValueError('benchmark needs at least one training and one test '
                         'scenario in ' + args.data)

    config = _config(args)
    train = [cbx.read(os.path.join(args.data, f)) for f in train_files]
    test = cbx.read(os.path.join(args.data, test_file))
    report = evaluate.run_benchmark(train, test, config,
                                    evaluate.parse_windows(args.windows))

    print(report.to_table(), end='')
    if {'gpr', 'svr'} <= set(report.models) and 'tas' in report.variables:
        labels = [w.label for w in report.windows]
        window = '20Y average' if '20Y average' in labels else labels[-1]
        ranking = evaluate.check_ranking(report, 'tas', window)
        print('ranking check (finite cells, GPR <= SVR on tas ' + window
              + '): ' + ('pass' if ranking else 'fail'))
    if args.reference:
        print()
        print(evaluate.reference_table(), end='')
    if args.csv:
        report.write_csv(args.csv)


def main_export_grid(args):
    """Export one field."""
    d = cbx.read(args.input)
    minus = cbx.read(args.minus) if args.minus else None
    export.export_grid(d, args.variable, args.year, args.format, args.out,
                       minus)


def _add_model_options(parser):
    parser.add_argument('--config', type=str, help="key = value config file.")
    parser.add_argument('--kernel',
                        type=str,
                        help="Kernel, e.g. 'matern32(ls=2) + white(var=0.1)'.")
    parser.add_argument('--noise', type=float, help="GPR noise variance.")
    parser.add_argument('--lam', type=float, help="KRR ridge parameter.")
    parser.add_argument('--cv',
                        action='store_true',
                        help="Select KRR hyperparameters by cross-validation.")
    parser.add_argument('--epsilon', type=float, help="SVR tube half width.")
    parser.add_argument('--c', type=float, help="SVR box constraint.")
    parser.add_argument('--tol', type=float, help="SVR KKT tolerance.")
    parser.add_argument('--max-iter',
                        dest='max_iter',
                        type=int,
                        help="SVR limit on SMO pair updates.")
    parser.add_argument('--eof-k',
                        dest='eof_k',
                        type=int,
                        help="EOF components per variable.")
    parser.add_argument('--feature-mode',
                        dest='feature_mode',
                        choices=['global_mean', 'eof_k'],
                        help="Aerosol featurization.")
    parser.add_argument('--feature-k',
                        dest='feature_k',
                        type=int,
                        help="Aerosol EOF count in eof_k mode.")
    parser.add_argument('--variables',
                        type=str,
                        help="Comma separated output variables.")
    parser.add_argument('--seed', type=int, help="Random seed.")
    parser.add_argument('--jobs', type=int, help="Worker threads.")


def main(argv=None):
    """Entry point to the kremu command-line interface.

    This function parses command-line arguments, configures logging and runs
    the subcommand named by the first argument to ``kremu``. It exits with the
    status documented in :py:mod:`kremu.__main__`.

    Args:
        argv (list[str]): Arguments, default ``sys.argv[1:]``.
    """
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = argparse.ArgumentParser(
        prog='kremu',
        description="Kernel regression emulators of gridded climate "
        "scenarios.")
    parser.add_argument('--version',
                        action='store_true',
                        help="Display the version number and exit.")
    parser.add_argument('--debug',
                        action='store_true',
                        help="Show traceback on error for debugging.")
    parser.add_argument('--log-level',
                        dest='log_level',
                        default='WARNING',
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'],
                        help="Logging level.")
    subparsers = parser.add_subparsers()

    parser_synth = subparsers.add_parser('synth',
                                         help="Generate synthetic scenarios.")
    parser_synth.add_argument('--seed', type=int, default=0)
    parser_synth.add_argument('--scenarios', type=int, default=4)
    parser_synth.add_argument('--years', type=int, default=86)
    parser_synth.add_argument('--grid', type=_grid, default=(8, 16),
                              help="Grid as HxW (rows x columns).")
    parser_synth.add_argument('--noise', type=float, default=0.1,
                              help="Noise standard deviation on tas.")
    parser_synth.add_argument('--linear', action='store_true',
                              help="Linear response mode.")
    parser_synth.add_argument('--out', type=str, required=True,
                              help="Output directory.")
    parser_synth.set_defaults(func=main_synth)

    parser_train = subparsers.add_parser('train', help="Train an emulator.")
    parser_train.add_argument('--model', choices=['gpr', 'svr', 'krr'])
    parser_train.add_argument('--data', type=str, nargs='+', required=True,
                              help="Training CBX files.")
    parser_train.add_argument('--out', type=str, required=True,
                              help="Model bundle to write.")
    _add_model_options(parser_train)
    parser_train.set_defaults(func=main_train)

    parser_predict = subparsers.add_parser('predict',
                                           help="Predict with an emulator.")
    parser_predict.add_argument('--model-file', dest='model_file', type=str,
                                required=True)
    parser_predict.add_argument('--data', type=str, required=True,
                                help="Input CBX file.")
    parser_predict.add_argument('--out', type=str, required=True,
                                help="Predicted CBX file.")
    parser_predict.add_argument('--with-variance', dest='with_variance',
                                action='store_true',
                                help="Also write GPR variances.")
    parser_predict.add_argument('--variance-out', dest='variance_out',
                                type=str,
                                help="Variance CBX file (default "
                                "<out>_variance.cbx).")
    parser_predict.set_defaults(func=main_predict)

    parser_evaluate = subparsers.add_parser('evaluate',
                                            help="RMSE table of a prediction.")
    parser_evaluate.add_argument('--pred', type=str, required=True)
    parser_evaluate.add_argument('--truth', type=str, required=True)
    parser_evaluate.add_argument('--windows', type=str, default='default',
                                 help="'default' or e.g. '2050,2090-2100'.")
    parser_evaluate.add_argument('--unweighted', action='store_true',
                                 help="Do not weight cells by cos(lat).")
    parser_evaluate.add_argument('--variables',
                                 type=lambda s: [v.strip() for v in
                                                 s.split(',') if v.strip()])
    parser_evaluate.add_argument('--label', type=str, default='model',
                                 help="Row label of the table.")
    parser_evaluate.add_argument('--csv', type=str, help="CSV file to write.")
    parser_evaluate.set_defaults(func=main_evaluate)

    parser_benchmark = subparsers.add_parser(
        'benchmark', help="Benchmark GPR, SVR and KRR.")
    parser_benchmark.add_argument('--data', type=str, required=True,
                                  help="Directory with manifest.txt.")
    parser_benchmark.add_argument('--models', type=str,
                                  help="Comma separated models.")
    parser_benchmark.add_argument('--windows', type=str, default='default')
    parser_benchmark.add_argument('--unweighted', action='store_true')
    parser_benchmark.add_argument('--reference', action='store_true',
                                  help="Print the published tas RMSE table.")
    parser_benchmark.add_argument('--csv', type=str, help="CSV file to write.")
    _add_model_options(parser_benchmark)
    parser_benchmark.set_defaults(func=main_benchmark)

    parser_export = subparsers.add_parser('export-grid',
                                          help="Export one field.")
    parser_export.add_argument('--in', dest='input', type=str, required=True)
    parser_export.add_argument('--variable', type=str, required=True)
    parser_export.add_argument('--year', type=int, required=True)
    parser_export.add_argument('--format', choices=['pgm', 'csv'],
                               default='pgm')
    parser_export.add_argument('--minus', type=str,
                               help="CBX file to subtract (difference map).")
    parser_export.add_argument('--out', type=str, required=True)
    parser_export.set_defaults(func=main_export_grid)

    # This is a hack, as argparse itself does not
    # allow to parse only --version without any
    # of the other required arguments.
    if '--version' in argv:
        print('kremu', __version__)
        sys.exit(0)

    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level),
                        format='%(levelname)s %(name)s: %(message)s')

    if not hasattr(args, 'func'):
        parser.print_usage()
        sys.exit(2)
    try:
        args.func(args)
    except KeyboardInterrupt:
        _print_err()
        _print_err("Interrupted.")
        if args.debug:
            raise
        sys.exit(1)
    except NumericalError as error:
        _print_err('Numerical error: {}'.format(error))
        if args.debug:
            raise
        sys.exit(4)
    except OSError as error:
        _print_err('File error: {}'.format(error))
        if args.debug:
            raise
        sys.exit(3)
    except ValueError as error:
        _print_err('Error: {}'.format(error))
        if args.debug:
            raise
        sys.exit(2)
    except Exception as error:
        _print_err('Error: {}'.format(error))
        if args.debug:
            raise
        sys.exit(1)
    else:
        sys.exit(0)


if __name__ == '__main__':
    main()
