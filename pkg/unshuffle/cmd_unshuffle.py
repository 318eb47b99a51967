#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
unshuffle recovers x from a design matrix A and a shuffled copy y of A x by
solving the power-sum system p_l(A x) = p_l(y), l = 1..n+1, and verifies the
algebra behind it exactly on small rational instances.

commands:
  gen      draw a seeded random instance
  solve    recover x, the permutation and the least squares refit
  verify   exact checks: square system count, unique root, regular
           sequence, eliminant
  bench    timing and accuracy sweep written as CSV

exit codes: 0 confirmed, 1 not confirmed, 2 usage error, 3 resource cap
"""
import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from unshuffle import __version__ as ver
from unshuffle import errors
from unshuffle import exactalg
from unshuffle import instance as inst
from unshuffle import macaulay
from unshuffle import polyring
from unshuffle import solver
from unshuffle import symfun
from unshuffle.logger import get_logger

LOG = get_logger(__name__)

EXIT_OK = 0
EXIT_UNCONFIRMED = 1
EXIT_USAGE = 2
EXIT_CAP = 3

MODES = ('square', 'unique', 'regseq', 'eliminant')
BENCH_HEADER = ('seed', 'm', 'n', 'sigma', 'phase_compile_ms',
                'phase_solve_ms', 'rel_err', 'perm_acc', 'certificate')


def get_modified_fname(fname, ext, suffix='.'):
    """
    Change the name of provided filename to different. Suffix should contain
    dot, since it is last part of the filename and dot should separate it
    from extension. If not, dot will be added automatically.
    """
    path, _ = os.path.splitext(fname)
    if not (suffix.endswith(".") or ext.startswith(".")):
        ext = "." + ext
    return "".join([path, suffix, ext])


def resolve_name(arguments, fname):
    """
    Return the report filename for an instance file, or None for stdout.
    With several instance files the output is treated as a directory.
    """
    if not arguments.out:
        return None
    if len(arguments.filename) == 1:
        return arguments.out
    if not os.path.exists(arguments.out):
        os.mkdir(arguments.out)
    if not os.path.isdir(arguments.out):
        raise IOError("Path `%s' is not directory" % arguments.out)
    return os.path.join(arguments.out,
                        get_modified_fname(os.path.basename(fname), "json",
                                           "_report."))


def write_text(text, filename=None):
    """Write text to the file, or to stdout when no filename is given"""
    if filename is None:
        sys.stdout.write(text)
        return
    with open(filename, "w") as fobj:
        fobj.write(text)


def dump_json(data):
    return json.dumps(data, indent=2) + "\n"


def gen(arguments):
    """
    Generate an instance
    """
    sigma = arguments.sigma or 0.0
    instance = inst.generate(arguments.m, arguments.n, arguments.seed,
                             domain=arguments.domain, sigma=sigma,
                             snr_db=arguments.snr_db)
    LOG.info("Generated %r", instance)
    write_text(instance.to_json(), arguments.out)
    return EXIT_OK


def solve(arguments):
    """
    Solve instances, one report per file
    """
    exit_code = EXIT_OK
    for fname in arguments.filename:
        instance = inst.Instance.load(fname)
        config = solver.SolverConfig(starts=arguments.starts,
                                     max_iters=arguments.max_iters,
                                     residual_tol=arguments.residual_tol,
                                     seed=arguments.seed,
                                     workers=arguments.workers,
                                     rounds=arguments.rounds)
        report = solver.run_pipeline(instance, config,
                                     baseline=arguments.baseline)
        LOG.info("%s: certificate %s, residual %g", fname,
                 report.certificate, report.residual_norm)
        write_text(dump_json(report.to_dict(timings=arguments.timings)),
                   resolve_name(arguments, fname))
        if report.certificate == solver.CERT_NONE:
            exit_code = max(exit_code, EXIT_UNCONFIRMED)
    return exit_code


def _verify_square(instance, allow_large):
    dim = exactalg.verify_square_count(instance)
    record = exactalg.verification_record(instance, quotient_dim=dim)
    return record, dim == math.factorial(instance.n)


def _verify_unique(instance, allow_large):
    result = exactalg.verify_unique_root(instance)
    record = exactalg.verification_record(
        instance, quotient_dim=result.quotient_dim, unique_root=result.point,
        multiplicity_note=result.multiplicity_note)
    record['status'] = result.status
    return record, result.point is not None


def _verify_regseq(instance, allow_large):
    regular = macaulay.regular_sequence_test(instance.A)
    record = exactalg.verification_record(instance)
    record['regular_sequence'] = regular
    return record, regular


def _verify_eliminant(instance, allow_large):
    if instance.domain != polyring.EXACT:
        raise errors.UsageError("Eliminant needs an exact instance")
    n = instance.n
    r_fixed = symfun.power_sums(instance.y, n)
    target = symfun.power_sum(n + 1, instance.y)
    result = macaulay.eliminant(instance.A, r_fixed, allow_large)
    vanishes = result.evaluate(target) == 0
    record = exactalg.verification_record(instance)
    record['eliminant'] = result.to_dict()
    record['vanishes_at_target'] = vanishes
    return record, vanishes and result.degree == math.factorial(n)


VERIFIERS = {'square': _verify_square,
             'unique': _verify_unique,
             'regseq': _verify_regseq,
             'eliminant': _verify_eliminant}


def verify(arguments):
    """
    Run exact checks on instances, emit JSON records
    """
    check = VERIFIERS[arguments.mode]
    exit_code = EXIT_OK
    records = []
    for fname in arguments.filename:
        instance = inst.Instance.load(fname)
        started = time.perf_counter()
        try:
            record, confirmed = check(instance, arguments.allow_large)
        except (errors.TheoremViolation, errors.DenominatorDegenerate) as exc:
            LOG.error("%s: %s", fname, exc)
            record = exactalg.verification_record(instance)
            record['error'] = str(exc)
            confirmed = False
        record['wall_time'] = time.perf_counter() - started
        record['mode'] = arguments.mode
        record['confirmed'] = confirmed
        records.append(record)
        if not confirmed:
            LOG.warning("%s: %s not confirmed", fname, arguments.mode)
            exit_code = EXIT_UNCONFIRMED
    write_text(dump_json(records), arguments.out)
    return exit_code


def parse_list(text):
    """Comma separated positive integers"""
    try:
        values = [int(chunk) for chunk in text.split(",") if chunk.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("`%s' is not a list of integers" %
                                         text)
    if not values or any(value < 1 for value in values):
        raise argparse.ArgumentTypeError("`%s' is not a list of positive "
                                         "integers" % text)
    return values


def bench_trial(task):
    """
    Run one benchmark trial, return the CSV row (as a tuple of values)
    """
    seed, m, n, snr_db, starts = task
    instance = inst.generate(m, n, seed, domain=polyring.FLOAT,
                             snr_db=snr_db)
    config = solver.SolverConfig(starts=starts, seed=seed)
    try:
        report = solver.run_pipeline(instance, config)
    except errors.UnshuffleError as exc:
        LOG.warning("seed %d, m=%d, n=%d: %s", seed, m, n, exc)
        return (seed, m, n, instance.sigma, float('nan'), float('nan'),
                float('nan'), float('nan'), solver.CERT_NONE)

    error = report.refit_relative_error
    if error is None:
        error = report.relative_error
    accuracy = report.permutation_accuracy
    return (seed, m, n, instance.sigma, report.timings['compile_ms'],
            report.timings['solve_ms'], error,
            float('nan') if accuracy is None else accuracy,
            report.certificate)


def format_row(row):
    return [("%.17g" % value) if isinstance(value, float) else value
            for value in row]


def bench_summary(rows):
    """Median solve time, error and accuracy per parameter point"""
    cells = {}
    for row in rows:
        cells.setdefault((row[1], row[2]), []).append(row)
    lines = []
    for (m, n), cell in sorted(cells.items()):
        lines.append("m=%d n=%d trials=%d median_solve_ms=%.6g "
                     "median_rel_err=%.6g median_perm_acc=%.6g" %
                     (m, n, len(cell),
                      np.median([row[5] for row in cell]),
                      np.median([row[6] for row in cell]),
                      np.median([row[7] for row in cell])))
    return lines


def bench(arguments):
    """
    Benchmark sweep over the m and n lists
    """
    tasks = [(arguments.seed + trial, m, n, arguments.snr_db,
              arguments.starts)
             for m in arguments.m_list for n in arguments.n_list
             for trial in range(arguments.trials)]
    for _, m, n, _, _ in tasks:
        if m < n:
            raise errors.UsageError("m >= n required (got m=%d, n=%d)" %
                                    (m, n))

    if arguments.jobs > 1:
        with ThreadPoolExecutor(max_workers=arguments.jobs) as executor:
            rows = list(executor.map(bench_trial, tasks))
    else:
        rows = [bench_trial(task) for task in tasks]
    rows.sort(key=lambda row: (row[1], row[2], row[0]))

    if arguments.out:
        fobj = open(arguments.out, "w", newline="")
    else:
        fobj = sys.stdout
    try:
        writer = csv.writer(fobj, lineterminator="\n")
        writer.writerow(BENCH_HEADER)
        for row in rows:
            writer.writerow(format_row(row))
    finally:
        if fobj is not sys.stdout:
            fobj.close()

    for line in bench_summary(rows):
        sys.stderr.write(line + "\n")
    return EXIT_OK


def _add_instance_files(parser):
    parser.add_argument("filename", nargs="+", help="instance JSON file(s)")
    parser.add_argument("-o", "--out", help="output filename, default: "
                        "stdout. If multiple files provided as the input, "
                        "output will be treated as the directory")


def get_parser():
    """
    Build the argument parser
    """
    formatter = argparse.RawDescriptionHelpFormatter
    parser = argparse.ArgumentParser(prog="unshuffle", description=__doc__,
                                     formatter_class=formatter)
    group = parser.add_mutually_exclusive_group()
    group.add_argument("-q", "--quiet", help='please, be quiet. Adding more '
                       '"q" will decrease verbosity', action="count",
                       default=0)
    group.add_argument("-v", "--verbose", help='be verbose. Adding more "v" '
                       'will increase verbosity', action="count", default=0)
    parser.add_argument("-V", "--version", action='version',
                        version="%(prog)s v" + ver)
    commands = parser.add_subparsers(dest="command_name", metavar="command")
    commands.required = True

    sub = commands.add_parser("gen", help="generate an instance")
    sub.add_argument("--m", type=int, required=True, help="number of rows")
    sub.add_argument("--n", type=int, required=True, help="number of "
                     "unknowns")
    sub.add_argument("--seed", type=int, default=0, help="64-bit seed, "
                     "default: 0")
    sub.add_argument("--domain", choices=polyring.DOMAINS,
                     default=polyring.EXACT, help="coefficient domain, "
                     "default: exact")
    noise = sub.add_mutually_exclusive_group()
    noise.add_argument("--sigma", type=float, help="noise standard "
                       "deviation (float domain only)")
    noise.add_argument("--snr-db", type=float, help="noise given as SNR in "
                       "dB (float domain only)")
    sub.add_argument("-o", "--out", help="output filename, default: stdout")
    sub.set_defaults(command=gen)

    sub = commands.add_parser("solve", help="recover x from an instance")
    _add_instance_files(sub)
    sub.add_argument("--starts", type=int, default=16, help="number of "
                     "Levenberg-Marquardt starts, default: 16")
    sub.add_argument("--seed", type=int, default=0, help="seed of the "
                     "starting points, default: 0")
    sub.add_argument("--max-iters", type=int, default=200, help="iteration "
                     "limit per start, default: 200")
    sub.add_argument("--residual-tol", type=float, default=1e-10,
                     help="scaled residual accepted as a root, default: "
                     "1e-10")
    sub.add_argument("--workers", type=int, default=1, help="starts run "
                     "concurrently, default: 1")
    sub.add_argument("--rounds", type=int, default=8, help="start rounds "
                     "tried until a certificate is reached, default: 8")
    sub.add_argument("--baseline", action="store_true", help="solve the "
                     "first n equations for all roots and keep the one "
                     "fitting the last equation best")
    sub.add_argument("--timings", action="store_true", help="add wall "
                     "clock times to the report")
    sub.set_defaults(command=solve)

    sub = commands.add_parser("verify", help="exact verification")
    _add_instance_files(sub)
    sub.add_argument("--mode", choices=MODES, required=True,
                     help="check to run")
    sub.add_argument("--allow-large", action="store_true", help="lift the "
                     "n <= 2 cap of the eliminant")
    sub.set_defaults(command=verify)

    sub = commands.add_parser("bench", help="benchmark sweep as CSV")
    sub.add_argument("--m-list", type=parse_list, default=[1000],
                     help="comma separated row counts, default: 1000")
    sub.add_argument("--n-list", type=parse_list, default=[4],
                     help="comma separated unknown counts, default: 4")
    sub.add_argument("--trials", type=int, default=10, help="trials per "
                     "parameter point, default: 10")
    sub.add_argument("--snr-db", type=float, help="noise level, default: "
                     "noiseless")
    sub.add_argument("--seed", type=int, default=0, help="first trial seed, "
                     "default: 0")
    sub.add_argument("--starts", type=int, default=16, help="solver starts, "
                     "default: 16")
    sub.add_argument("--jobs", type=int, default=1, help="trials run "
                     "concurrently, default: 1")
    sub.add_argument("-o", "--out", help="CSV filename, default: stdout")
    sub.set_defaults(command=bench)
    return parser


def main(argv=None):
    """
    Parse options, run the command, map errors onto exit codes
    """
    arguments = get_parser().parse_args(argv)
    LOG.set_verbose(arguments.verbose, arguments.quiet)

    if getattr(arguments, "trials", 0) < 0:
        LOG.error("Number of trials cannot be negative")
        return EXIT_USAGE
    if getattr(arguments, "jobs", 1) < 1:
        LOG.error("Number of jobs has to be positive")
        return EXIT_USAGE

    try:
        return arguments.command(arguments)
    except errors.CapExceeded as exc:
        LOG.error("%s", exc)
        return EXIT_CAP
    except (errors.UsageError, errors.NonFiniteData, IOError) as exc:
        LOG.error("%s", exc)
        return EXIT_USAGE
    except errors.UnshuffleError as exc:
        LOG.error("%s", exc)
        return EXIT_UNCONFIRMED


if __name__ == "__main__":
    sys.exit(main())
