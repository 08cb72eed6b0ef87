"""
Random automata, trees and formulas for the property tests.  Everything is
drawn from an explicit random.Random so a corpus is reproducible from its
seed.
"""

import itertools

from krivine_automata.syntax import *
from krivine_automata.apka import Apka, load_apka
from krivine_automata.trees import RegularTree
from krivine_automata.translate import UnsupportedPrecedence, apka_to_hfl

__all__ = ['random_tree', 'random_ground_formula', 'random_order_one_formula', 'random_apka',
           'hfl_corpus', 'complement_corpus', 'looping_automata']


PROPS = ('P', 'Q')

ARG_NAMES = ('x', 'y')


def random_tree(rng, props=PROPS, max_states=3):
    n = rng.randint(1, max_states)
    names = ['n%i' % i for i in range(n)]
    labels = {s: [p for p in props if rng.random() < 0.5] for s in names}
    left = {s: rng.choice(names) for s in names}
    right = {s: rng.choice(names) for s in names}
    return RegularTree(props, names, labels, left, right, names[0])


def _literal(rng, props):
    r = rng.randrange(4)
    if r == 0:
        return rng.choice([true, false])()
    elif r == 1:
        return neg_prop(rng.choice(props))
    return prop(rng.choice(props))


def _fresh_names():
    return ('X%i' % i for i in itertools.count())


def random_ground_formula(rng, depth=3, props=PROPS, bound=(), names=None, lvars=(), calls=None):
    """
    A ground HFL formula with well-named mu/nu binders.  It is closed unless
    `lvars` (ground lambda variables) or `calls` (function fixpoint name ->
    arity) are given, in which case it may refer to them.
    """

    if names is None:
        names = _fresh_names()
    calls = calls or {}
    if depth == 0:
        leaves = ['lit', 'lit']
        if bound:
            leaves.append('fix')
        if lvars:
            leaves.extend(['var', 'var'])
        r = rng.choice(leaves)
        if r == 'fix':
            return svar(rng.choice(bound))
        elif r == 'var':
            return lvar(rng.choice(lvars))
        return _literal(rng, props)

    def _sub(extra=()):
        return random_ground_formula(rng, depth-1, props, tuple(bound) + extra, names, lvars, calls)

    r = rng.randrange(7 if calls else 6)
    if r == 0:
        return _literal(rng, props) if not lvars or rng.random() < 0.5 else lvar(rng.choice(lvars))
    elif r == 1:
        return diamond(_sub())
    elif r == 2:
        return box(_sub())
    elif r == 3:
        return disj(_sub(), _sub())
    elif r == 4:
        return conj(_sub(), _sub())
    elif r == 5:
        name = next(names)
        return (mu if rng.random() < 0.5 else nu)(name, PR, _sub((name,)))
    name = rng.choice(sorted(calls))
    f = svar(name)
    for _ in range(calls[name]):
        f = app(f, _sub())
    return f


def random_order_one_formula(rng, depth=2, props=PROPS):
    """
    A closed ground formula of order 1: a lambda abstraction or a function
    fixpoint of one or two ground arguments, applied to ground formulas.
    Ground fixpoints in the body may use the lambda variables.
    """

    names = _fresh_names()
    arity = rng.randint(1, 2)
    params = ARG_NAMES[:arity]
    if rng.random() < 0.5:
        head = random_ground_formula(rng, depth, props, names=names, lvars=params)
    else:
        head = random_ground_formula(rng, depth, props, names=names, lvars=params, calls={'F': arity})
    for name in reversed(params):
        head = lam(name, PR, head)
    # A bare lambda is padded by the translation, a fixpoint is not
    if 'F' in free_variables(head)[1] or rng.random() < 0.5:
        head = (mu if rng.random() < 0.5 else nu)('F', make_type([PR]*arity), head)
    for _ in params:
        head = app(head, random_ground_formula(rng, depth-1, props, names=names))
    return head


def _body(rng, depth, owner, sig, ground, callers, props, choices):
    options = ['lit', 'lit']
    if ground:
        options.append('state')
    if sig[owner]:
        options.extend(['arg', 'arg'])
    if depth > 0:
        if choices:
            options.extend(['dia', 'box', 'or', 'and'])
        if callers:
            options.extend(['call', 'call'])
    r = rng.choice(options)

    def _sub():
        return _body(rng, depth-1, owner, sig, ground, callers, props, choices)

    if r == 'lit':
        return _literal(rng, props)
    elif r == 'state':
        return svar(rng.choice(ground))
    elif r == 'arg':
        index = rng.randrange(len(sig[owner]))
        return lvar(sig[owner][index][0], owner, index)
    elif r == 'dia':
        return diamond(_sub())
    elif r == 'box':
        return box(_sub())
    elif r == 'or':
        return disj(_sub(), _sub())
    elif r == 'and':
        return conj(_sub(), _sub())
    x = rng.choice(callers)
    f = svar(x)
    for _ in sig[x]:
        f = app(f, _sub())
    return f


def random_apka(rng, n_states=3, props=PROPS, max_priority=2, depth=3, choices=True):
    """
    A valid automaton of order at most 1: the initial state X0 is ground,
    every other state takes no argument, one ground argument x or two
    ground arguments x and y.  Without `choices` the bodies have no
    connectives or modalities, so every play is deterministic and stays at
    its start node.
    """

    states = ['X%i' % i for i in range(n_states)]
    arity = {x: 0 if x == states[0] else rng.choice([0, 1, 1, 2]) for x in states}
    sig = {x: [(name, PR) for name in ARG_NAMES[:arity[x]]] for x in states}
    ground = [x for x in states if arity[x] == 0]
    callers = [x for x in states if arity[x] > 0]
    delta = {x: _body(rng, depth, x, sig, ground, callers, props, choices) for x in states}

    raw = {x: rng.randint(0, max_priority) for x in states}
    base = rng.choice([0, 1])
    ranks = {p: i + base for i, p in enumerate(sorted(set(raw.values())))}
    priority = {x: ranks[raw[x]] for x in states}
    return Apka(states, sig, priority, 'X0', delta, props=list(props))


def hfl_corpus(rng, size=30):
    """
    Closed ground formulas of order at most 1: a third drawn directly, a
    third built around lambdas and function fixpoints, and the rest obtained
    from random automata whose translation is supported.
    """

    corpus = [random_ground_formula(rng) for _ in range(size // 3)]
    corpus.extend([random_order_one_formula(rng) for _ in range(size // 3)])
    while len(corpus) < size:
        try:
            corpus.append(apka_to_hfl(random_apka(rng)))
        except UnsupportedPrecedence:
            pass
    return corpus


def complement_corpus(rng, size=50):
    return [random_apka(rng) for _ in range(size)]


_LOOPING = ("""props P Q
init I
state I : Pr { prio %(mid)i ; body (X I) }
state X : Pr -> Pr { prio %(mid)i ; args x:Pr ; body (<> x) \\/ ([] Y) }
state Y : Pr { prio 0 ; body (X Y) }
""", """props P Q
init I
state I : Pr { prio %(top)i ; body ((X I) J) }
state X : Pr -> Pr -> Pr { prio %(mid)i ; args x:Pr, y:Pr ; body (<> y) \\/ ([] x) }
state J : Pr { prio 0 ; body ((X J) I) }
""", """props P Q
init I
state I : Pr { prio %(top)i ; body (<> J) /\\ ([] I) }
state J : Pr { prio %(mid)i ; body (<> I) \\/ ([] J) }
""")


def looping_automata(n):
    """
    Three automata without literals, so every play of them is infinite,
    with priorities that fit the Sigma vocabulary of size `n`.
    """

    levels = {'top': min(2, n-1), 'mid': min(1, n-1)}
    return [load_apka(text % levels) for text in _LOOPING]
