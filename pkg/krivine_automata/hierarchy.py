import logging
import threading
from textwrap import fill as tw_fill

from krivine_automata.config import Caps
from krivine_automata.syntax import *
from krivine_automata.apka import Apka, validate
from krivine_automata.trees import AtMost, prefix, distance
from krivine_automata.machine import (CHOICES, init_run, pending, step, run_script, run_strategy,
                                      ExistsWins, _binding)
from krivine_automata.operations import LiftedQueue, parse_script

__all__ = ['VocabularyError', 'HierarchyVocab', 'vocab', 'vocab_for', 'gen_hard',
           'GameTreeNode', 'GameTreeHandle', 'encode_game_tree', 'ConvergenceReport',
           'banach_iterate', 'LiftedPlay', 'lifted_play', 'label_violations']


hierarchy_logger = logging.getLogger('__main__')

FLAVORS = ('Sigma', 'Pi')


class VocabularyError(ValueError):
    pass


def _flavor(flavor):
    for f in FLAVORS:
        if str(flavor).lower() == f.lower():
            return f
    raise VocabularyError(f"unknown flavor '{flavor}', expected Sigma or Pi")


class HierarchyVocab(object):
    """
    The propositions D, C, V, T, F plus one F_i per priority: F_0..F_{n-1}
    for the Sigma flavor, F_1..F_n for the Pi flavor.
    """

    def __init__(self, n, flavor):
        if n < 1:
            raise VocabularyError(f"n must be at least 1, not {n}")
        self.n = int(n)
        self.flavor = _flavor(flavor)
        self.base = 0 if self.flavor == 'Sigma' else 1
        self.props = ['D', 'C', 'V', 'T', 'F'] + ['F_%i' % (i + self.base) for i in range(self.n)]

    def __repr__(self):
        output = "<%s n=%i, flavor=%s, props=%s>" % (type(self).__name__,
                                                      self.n,
                                                      self.flavor,
                                                      ' '.join(self.props))
        return tw_fill(output, subsequent_indent='    ')

    def __eq__(self, other):
        return isinstance(other, HierarchyVocab) and (self.n, self.flavor) == (other.n, other.flavor)

    @property
    def priorities(self):
        return list(range(self.base, self.base + self.n))

    def label_for_priority(self, p):
        if p not in self.priorities:
            raise VocabularyError(f"priority {p} has no label in {self.flavor}_{self.n}")
        return 'F_%i' % p


def vocab(n, flavor):
    return HierarchyVocab(n, flavor)


def vocab_for(a):
    """
    The smallest vocabulary that labels every priority of `a`: Sigma when
    the priorities start at 0, Pi when they start at 1.
    """

    used = a.used_priorities
    low, high = min(used), max(used)
    if low == 0:
        return HierarchyVocab(high + 1, 'Sigma')
    return HierarchyVocab(high, 'Pi')


def gen_hard(n, flavor='Sigma'):
    """
    The hard automaton for the alternation class of the given size and
    flavor: states I, O, X_{n-1}..X_0 where I starts O on tt, each X_i
    forwards its argument to X_{i-1} (X_0 to O), and O reads the label of
    the current node.
    """

    voc = HierarchyVocab(n, flavor)
    base = voc.base
    xs = ['X_%i' % i for i in range(n-1, -1, -1)]
    states = ['I', 'O'] + xs
    sig = {'I': [], 'O': [('x0', PR)]}
    for x in xs:
        sig[x] = [('x0', PR)]
    priority = {'I': base, 'O': base}
    for i in range(n):
        priority['X_%i' % i] = i + base

    delta = {'I': app(svar('O'), true())}
    for i in range(n):
        target = svar('X_%i' % (i-1)) if i > 0 else svar('O')
        delta['X_%i' % i] = app(target, lvar('x0', 'X_%i' % i, 0))

    def _x0():
        return lvar('x0', 'O', 0)

    def _o_x0():
        return app(svar('O'), _x0())

    def _implies(label, rhs):
        return disj(neg_prop(label), rhs)

    implications = [_implies('D', diamond(_o_x0())),
                    _implies('C', box(_o_x0())),
                    _implies('V', diamond(_x0()))]
    for j in range(base + n - 1, base - 1, -1):
        implications.append(_implies('F_%i' % j, diamond(app(svar('X_%i' % (j - base)), _o_x0()))))
    big = implications[-1]
    for imp in reversed(implications[:-1]):
        big = conj(imp, big)
    delta['O'] = conj(neg_prop('F'), disj(prop('T'), big))

    return Apka(states, sig, priority, 'I', delta, props=voc.props)


class GameTreeNode(object):
    """
    A vertex of an encoded game tree: the game position that induces it, its
    single label and (once demanded) its two children.
    """

    __slots__ = ('state', 'label', 'is_choice', 'inner_priorities', 'depth', '_children')

    def __init__(self, state, label, is_choice, depth):
        self.state = state
        self.label = label
        self.is_choice = is_choice
        self.inner_priorities = state.config.priorities
        self.depth = depth
        self._children = None

    def __repr__(self):
        output = "<%s %s depth=%i, Q=%s>" % (type(self).__name__,
                                             self.label,
                                             self.depth,
                                             format_formula(self.state.config.formula))
        return tw_fill(output, subsequent_indent='    ')

    @property
    def config(self):
        return self.state.config


class GameTreeHandle(object):
    """
    Lazily generated encoding of the acceptance game of `apka` over `tree`.
    Children are computed on demand and memoized per node; both children of
    a node without a real choice are one shared node.
    """

    def __init__(self, apka, tree, voc):
        self.apka = apka
        self.tree = tree
        self.vocab = voc
        self.props = list(voc.props)
        self._lock = threading.RLock()
        self.generated = 0
        self.root = self._make(init_run(apka, tree, record=False, check=False), 0)

    def __repr__(self):
        output = "<%s vocab=%s_%i, generated=%i>" % (type(self).__name__,
                                                      self.vocab.flavor,
                                                      self.vocab.n,
                                                      self.generated)
        return tw_fill(output, subsequent_indent='    ')

    def _label(self, s):
        a = s.apka
        cfg = s.config
        q = cfg.formula
        k = q.kind
        if q.is_literal:
            return 'T' if isinstance(pending(s), ExistsWins) else 'F', False
        elif k == FIXVAR:
            return self.vocab.label_for_priority(a.priority[q.name]), False
        elif k == VAR:
            bound = _binding(a, q, cfg.current.env)
            if a.type_of(q) == PR and bound.env is not cfg.computing:
                return 'V', False
            return 'D', False
        elif k in (OR, DIAMOND):
            return 'D', True
        elif k in (AND, BOX):
            return 'C', True
        return 'D', False

    def _make(self, s, depth):
        label, is_choice = self._label(s)
        self.generated += 1
        return GameTreeNode(s, label, is_choice, depth)

    def _expand(self, node):
        s = node.state
        if s.config.formula.is_literal:
            return (node, node)
        if node.is_choice:
            children = []
            for choice in CHOICES:
                child = s.fork()
                step(child, choice)
                children.append(self._make(child, node.depth+1))
            return tuple(children)
        child = s.fork()
        step(child)
        shared = self._make(child, node.depth+1)
        return (shared, shared)

    def children(self, node):
        if node._children is None:
            with self._lock:
                if node._children is None:
                    node._children = self._expand(node)
        return node._children

    def successor(self, node, side):
        return self.children(node)[side]

    def label_set(self, node):
        return frozenset([node.label])

    def holds(self, node, name):
        return node.label == name


def encode_game_tree(t, a, n=None, flavor=None):
    """
    The tree encoding the acceptance game of `a` over `t`, over the
    vocabulary given by `n`/`flavor` (default: the smallest that fits a).
    """

    report = validate(a)
    if not report.ok:
        raise ValueError("automaton does not validate: %s" % '; '.join(report.violations))
    if n is None and flavor is None:
        voc = vocab_for(a)
    else:
        fit = vocab_for(a)
        voc = HierarchyVocab(fit.n if n is None else n, fit.flavor if flavor is None else flavor)
    for p in a.used_priorities:
        voc.label_for_priority(p)
    return GameTreeHandle(a, t, voc)


def label_violations(p):
    """
    Nodes of a prefix tree that do not carry exactly one proposition, as
    (level, index, label count) tuples.
    """

    bad = []
    for level, row in enumerate(p.levels):
        for idx, mask in enumerate(row):
            count = bin(int(mask)).count('1')
            if count != 1:
                bad.append((level, idx, count))
    return bad


class ConvergenceReport(object):
    """
    Outcome of iterating the game-tree encoding: the distances between
    consecutive iterates, the final prefix and the residual distance of one
    more application at one level less.
    """

    def __init__(self, depth, iters, distances, prefix, residual):
        self.depth = depth
        self.iters = iters
        self.distances = list(distances)
        self.prefix = prefix
        self.residual = residual

    def __repr__(self):
        output = "<%s depth=%i, iters=%i, residual=%r>" % (type(self).__name__,
                                                           self.depth,
                                                           self.iters,
                                                           self.residual)
        return tw_fill(output, subsequent_indent='    ')

    @property
    def residual_zero(self):
        return isinstance(self.residual, AtMost) and self.residual.level >= self.depth

    @property
    def stable_since(self):
        """
        Index of the first iterate from which all later ones agree to the
        full prefix depth, or None.
        """

        since = None
        for i, d in enumerate(self.distances):
            if isinstance(d, AtMost) and d.level > self.depth:
                if since is None:
                    since = i
            else:
                since = None
        return since

    def format(self):
        lines = ["depth: %i" % self.depth,
                 "iterations: %i" % self.iters,
                 "distances: %s" % ', '.join([repr(d) for d in self.distances]),
                 "stable since: %s" % self.stable_since,
                 "residual: %r (%s)" % (self.residual, 'zero' if self.residual_zero else 'non-zero')]
        return '\n'.join(lines)

    def log_report(self, log=None):
        if log is None:
            log = hierarchy_logger
        log.debug("=== Convergence Report ===")
        for line in self.format().split('\n'):
            log.debug(" %s", line)
        log.debug("===   ===")


def banach_iterate(a, seed, iters=10, depth=8, caps=None, log=None):
    """
    Iterate the encoding t -> T(t, a) starting from `seed` and extract the
    depth-`depth` prefix of the last iterate.  Returns (PrefixTree,
    ConvergenceReport).
    """

    if log is None:
        log = hierarchy_logger
    if caps is None:
        caps = Caps()
    caps.check('depth', depth)
    voc = vocab_for(a)
    extra = [p for p in a.used_props if p not in voc.props]
    if extra:
        raise VocabularyError("automaton reads propositions outside %s_%i: %s" % (voc.flavor, voc.n, ', '.join(extra)))
    if list(seed.props) != voc.props:
        raise VocabularyError("seed tree must be over %s" % ' '.join(voc.props))

    current = seed
    distances = []
    for i in range(iters):
        nxt = encode_game_tree(current, a, n=voc.n, flavor=voc.flavor)
        distances.append(distance(current, nxt, depth+1, caps=caps))
        log.debug("Iteration %i: distance %r", i+1, distances[-1])
        current = nxt

    result = prefix(current, depth, caps=caps)
    again = encode_game_tree(current, a, n=voc.n, flavor=voc.flavor)
    residual = distance(prefix(current, max(depth-1, 0), caps=caps),
                        prefix(again, max(depth-1, 0), caps=caps),
                        depth, caps=caps)
    report = ConvergenceReport(depth, iters, distances, result, residual)
    report.log_report(log)
    return result, report


class LiftedPlay(object):
    """
    A scripted play of an automaton next to the mirrored play of the hard
    automaton on its encoded game tree.
    """

    def __init__(self, inner, lifted, vocab):
        self.inner = inner
        self.lifted = lifted
        self.vocab = vocab

    def __repr__(self):
        output = "<%s inner=%s, lifted=%s, reproduced=%s>" % (type(self).__name__,
                                                              self.inner.status,
                                                              self.lifted.status,
                                                              self.reproduced)
        return tw_fill(output, subsequent_indent='    ')

    @property
    def reproduced(self):
        """
        Whether the lifted play ends with the inner verdict; None when the
        inner play is undecided.
        """

        if not self.inner.decided:
            return None
        return self.lifted.status == self.inner.status


def lifted_play(a, t, script, n=None, flavor=None, max_steps=10000):
    """
    Play `script` on `a` over `t`, then let the matching hard automaton play
    on the encoded game tree, mirroring the script at the encoded choice
    nodes and following the node labels at its own boolean choices.
    """

    tokens = parse_script(script) if isinstance(script, str) else list(script)
    inner = run_script(init_run(a, t), tokens, max_steps=max_steps)

    handle = encode_game_tree(t, a, n=n, flavor=flavor)
    voc = handle.vocab
    hard = gen_hard(voc.n, voc.flavor)
    # Each inner step is one round of several hard-automaton steps
    lifted = run_strategy(init_run(hard, handle), LiftedQueue(tokens),
                          max_steps=max_steps * (2*voc.n + 16))
    hierarchy_logger.debug("Lifted play: inner %s, lifted %s", inner.status, lifted.status)
    return LiftedPlay(inner, lifted, voc)
