import os
import sys
import time
import logging
import argparse

from krivine_automata.config import CapExceeded, load_caps
from krivine_automata.control import CommandUsageError, CommandProcessor
from krivine_automata.version import version as ka_version

__all__ = ['EXIT_OK', 'EXIT_FALSE', 'EXIT_USAGE', 'EXIT_INPUT', 'EXIT_CAP', 'exit_status',
           'build_parser', 'run_cli']


EXIT_OK = 0
EXIT_FALSE = 1
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_CAP = 4

_GLOBAL_ARGS = ('command', 'debug', 'logfile', 'caps', 'allow_higher_order')


def exit_status(status, info):
    """
    Map a command's (status, info) result to the process exit status.
    """

    if status:
        return EXIT_OK
    if isinstance(info, CommandUsageError):
        return EXIT_USAGE
    if isinstance(info, CapExceeded):
        return EXIT_CAP
    if isinstance(info, BaseException):
        return EXIT_INPUT
    return EXIT_FALSE


def build_parser():
    parser = argparse.ArgumentParser(
            description='check, simulate and translate alternating parity Krivine automata and HFL formulas over infinite binary trees',
            formatter_class=argparse.ArgumentDefaultsHelpFormatter
            )
    parser.add_argument('-l', '--logfile', type=str,
                        help='file to write logging to')
    parser.add_argument('--debug', action='store_true',
                        help='enable debug messages in the log')
    parser.add_argument('--caps', type=str,
                        help='resource cap overrides as states=..,order=..,depth=..')
    parser.add_argument('--allow-higher-order', action='store_true',
                        help='evaluate fixpoints above the order and arity caps')
    parser.add_argument('--version', action='version', version='%(prog)s '+ka_version)
    subparsers = parser.add_subparsers(dest='command', metavar='command')
    subparsers.required = True

    p = subparsers.add_parser('typecheck', help='print the type of a formula or of every state')
    p.add_argument('filename', type=str,
                   help='formula or automaton file')
    p.add_argument('--dialect', type=str, choices=('hfl', 'apka'), default='hfl',
                   help='input dialect')

    p = subparsers.add_parser('validate', help='check the well-formedness of an automaton')
    p.add_argument('filename', type=str,
                   help='automaton file')

    p = subparsers.add_parser('complement', help='write the dual automaton')
    p.add_argument('filename', type=str,
                   help='automaton file')
    p.add_argument('-o', '--output', type=str, required=True,
                   help='output automaton file, - for stdout')

    p = subparsers.add_parser('check', help='decide acceptance with the denotational oracle')
    p.add_argument('--tree', type=str, required=True,
                   help='regular tree file')
    p.add_argument('--node', type=str, required=True,
                   help='tree-state to check at')
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument('--hfl', type=str,
                   help='closed ground HFL formula file')
    g.add_argument('--apka', type=str,
                   help='automaton file')

    p = subparsers.add_parser('simulate', help='play the acceptance game and dump the trace')
    p.add_argument('--apka', type=str, required=True,
                   help='automaton file')
    p.add_argument('--tree', type=str, required=True,
                   help='regular tree file')
    p.add_argument('--node', type=str,
                   help='tree-state to start at instead of the root')
    p.add_argument('--script', type=str,
                   help='file of L/R choices, one per choice point')
    p.add_argument('--max-steps', type=int, default=1000,
                   help='maximum number of configurations to record')
    p.add_argument('--interactive', action='store_true',
                   help='ask for every choice on the terminal')
    p.add_argument('--random', action='store_true',
                   help='random play that never loses on the spot')
    p.add_argument('--rng-seed', type=int,
                   help='seed for --random')
    p.add_argument('--monitors', action='store_true',
                   help='check the run invariants and report violations')
    p.add_argument('--show-formulas', action='store_true',
                   help='print the subformula table before the trace')

    p = subparsers.add_parser('translate', help='translate between HFL and automata')
    p.add_argument('filename', type=str,
                   help='formula or automaton file')
    p.add_argument('--to', type=str, choices=('apka', 'hfl'), required=True,
                   help='target language')
    p.add_argument('-o', '--output', type=str, required=True,
                   help='output file, - for stdout')

    p = subparsers.add_parser('gen-hard', help='write the hard automaton of an alternation class')
    p.add_argument('--n', type=int, required=True,
                   help='class index')
    p.add_argument('--class', dest='flavor', type=str, choices=('sigma', 'pi'), default='sigma',
                   help='class flavor')
    p.add_argument('-o', '--output', type=str, required=True,
                   help='output automaton file, - for stdout')

    p = subparsers.add_parser('encode', help='write a prefix of the encoded game tree')
    p.add_argument('--tree', type=str, required=True,
                   help='regular tree file')
    p.add_argument('--apka', type=str, required=True,
                   help='automaton file')
    p.add_argument('--depth', type=int, default=4,
                   help='prefix depth')
    p.add_argument('-o', '--output', type=str, required=True,
                   help='output prefix file, - for stdout')

    p = subparsers.add_parser('fixpoint', help='iterate the game-tree encoding from a seed tree')
    p.add_argument('--apka', type=str, required=True,
                   help='automaton file')
    p.add_argument('--seed', type=str, required=True,
                   help='seed tree file over the hierarchy vocabulary')
    p.add_argument('--iters', type=int, default=10,
                   help='number of iterations')
    p.add_argument('--depth', type=int, default=8,
                   help='prefix depth')
    p.add_argument('-o', '--output', type=str, required=True,
                   help='output prefix file, - for stdout')

    p = subparsers.add_parser('distance', help='print the dyadic distance between two trees')
    p.add_argument('first', type=str,
                   help='tree or prefix file')
    p.add_argument('second', type=str,
                   help='tree or prefix file')
    p.add_argument('--cap', type=int, default=16,
                   help='number of levels to compare')
    return parser


def run_cli(argv=None):
    """
    Run one command and return the exit status.
    """

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code is None else e.code

    # Setup logging
    log = logging.getLogger('__main__')
    logFormat = logging.Formatter('%(asctime)s [%(levelname)-8s] %(message)s',
                                  datefmt='%Y-%m-%d %H:%M:%S')
    logFormat.converter = time.gmtime
    if args.logfile is None:
        logHandler = logging.StreamHandler(sys.stderr)
    else:
        logHandler = logging.FileHandler(args.logfile)
    logHandler.setFormatter(logFormat)
    log.addHandler(logHandler)
    log.setLevel(logging.DEBUG if args.debug else logging.INFO)

    try:
        log.info("Starting %s with PID %i", os.path.basename(sys.argv[0]), os.getpid())
        log.info("Version: %s", ka_version)
        log.info("Cmdline args:")
        for arg in vars(args):
            log.info("  %s: %s", arg, getattr(args, arg))

        try:
            caps = load_caps(overrides=args.caps)
        except ValueError as e:
            log.error("Invalid resource caps: %s", str(e))
            return EXIT_USAGE
        if args.allow_higher_order:
            caps = caps.replace(higher_order=True)
        log.debug("Resource caps: %s", caps)

        processor = CommandProcessor(log, caps)
        kwargs = {key: value for key, value in vars(args).items() if key not in _GLOBAL_ARGS}
        status, info = processor(args.command, **kwargs)
        code = exit_status(status, info)
        log.info("Finished %s with exit status %i (%s)", args.command, code, info)
        return code
    finally:
        log.removeHandler(logHandler)
        logHandler.close()
