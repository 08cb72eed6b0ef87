#!/usr/bin/env python3

import sys

from krivine_automata.cli import run_cli


def main(argv):
    return run_cli(argv[1:])


if __name__ == '__main__':
    sys.exit(main(sys.argv))
