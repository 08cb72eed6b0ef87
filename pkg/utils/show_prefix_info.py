#!/usr/bin/env python3

import sys
import numpy

from krivine_automata.trees import load_prefix
from krivine_automata.hierarchy import label_violations


def main(args):
    for filename in args:
        with open(filename, 'r') as fh:
            p = load_prefix(fh.read())
        print(f"{filename}:")
        print('  Propositions:', ' '.join(p.props))
        print('  Depth:', p.depth, '(%i nodes)' % p.n_nodes)
        masks = numpy.concatenate(p.levels)
        print('  Nodes per proposition:')
        for i, name in enumerate(p.props):
            count = int(((masks >> numpy.uint64(i)) & numpy.uint64(1)).sum())
            print('    %s: %i' % (name, count))
        bad = label_violations(p)
        print('  Single labeled:', 'yes' if not bad else 'no (%i nodes)' % len(bad))


if __name__ == "__main__":
    main(sys.argv[1:])
