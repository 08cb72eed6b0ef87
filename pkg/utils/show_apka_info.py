#!/usr/bin/env python3

import sys

from krivine_automata.apka import load_apka, validate, descriptor, alternation_class
from krivine_automata.syntax import format_type
from krivine_automata.hierarchy import VocabularyError, vocab_for


def main(args):
    for filename in args:
        with open(filename, 'r') as fh:
            a = load_apka(fh.read())
        print(f"{filename}:")
        print('  Propositions:', ' '.join(a.props or a.used_props))
        print('  Initial state:', a.init)
        print('  States:')
        for x in a.states:
            print('    %s : %s, priority %i, %i subformulas' % (x, format_type(a.state_type[x]),
                                                              a.priority[x], a.body_size(x)))
        report = validate(a)
        if report.ok:
            d = descriptor(a)
            print('  Class:', alternation_class(a), '(order %i)' % d.order)
            try:
                voc = vocab_for(a)
                print('  Hierarchy vocabulary:', '%s_%i' % (voc.flavor, voc.n), '->', ' '.join(voc.props))
            except VocabularyError as e:
                print('  Hierarchy vocabulary: none -', str(e))
        else:
            print('  Violations:')
            for violation in report:
                print('    ', violation)


if __name__ == "__main__":
    main(sys.argv[1:])
