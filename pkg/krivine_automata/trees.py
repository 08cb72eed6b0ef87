import logging
import itertools
from collections import deque
from functools import total_ordering
from textwrap import fill as tw_fill

import numpy as np
import lark as L

from krivine_automata.syntax import ParseError, run_parser
from krivine_automata.config import Caps

__all__ = ['LEFT', 'RIGHT', 'TreeFormatError', 'RegularTree', 'PrefixTree',
           'DyadicDistance', 'Exact', 'AtMost', 'load_tree', 'dump_tree',
           'prefix', 'distance', 'format_prefix', 'dump_prefix', 'load_prefix',
           'perturb_at_level', 'all_regular_trees']


trees_logger = logging.getLogger('__main__')

LEFT = 0
RIGHT = 1


class TreeFormatError(ValueError):
    pass


def _props_mask(props, labels):
    mask = 0
    for i, p in enumerate(props):
        if p in labels:
            mask |= 1 << i
    return mask


class RegularTree(object):
    """
    A labeled, fully infinite binary tree given by a finite set of tree-states,
    each with a label set and a left and right successor.  The tree denoted is
    the unfolding from `root`.

    Regular trees, prefixes and encoded game trees all offer the same read
    interface: `props`, `root`, `label_set(node)` and `successor(node, side)`.
    """

    def __init__(self, props, tree_states, labels, left, right, root):
        self.props = list(props)
        self.tree_states = list(tree_states)
        self.labels = {s: frozenset(labels.get(s, ())) for s in self.tree_states}
        self.left = dict(left)
        self.right = dict(right)
        self.root = root

        if len(set(self.props)) != len(self.props):
            raise TreeFormatError("duplicate proposition names")
        if len(set(self.tree_states)) != len(self.tree_states):
            raise TreeFormatError("duplicate tree-state names")
        if len(self.props) > 64:
            raise TreeFormatError("at most 64 propositions are supported")
        known = set(self.tree_states)
        if root not in known:
            raise TreeFormatError(f"root '{root}' is not a tree-state")
        for s in self.tree_states:
            for side, succ in (('left', self.left), ('right', self.right)):
                if s not in succ:
                    raise TreeFormatError(f"tree-state '{s}' has no {side} successor")
                if succ[s] not in known:
                    raise TreeFormatError(f"tree-state '{s}' has dangling {side} successor '{succ[s]}'")
            unknown = self.labels[s] - set(self.props)
            if unknown:
                raise TreeFormatError("tree-state '%s' uses unknown propositions %s" % (s, ', '.join(sorted(unknown))))

        self._position = {s: i for i, s in enumerate(self.tree_states)}
        self.left_index = np.array([self._position[self.left[s]] for s in self.tree_states], dtype=np.int64)
        self.right_index = np.array([self._position[self.right[s]] for s in self.tree_states], dtype=np.int64)
        self.label_masks = np.array([_props_mask(self.props, self.labels[s]) for s in self.tree_states], dtype=np.uint64)

    def __repr__(self):
        output = "<%s props=%s, states=%i, root=%s>" % (type(self).__name__,
                                                         self.props,
                                                         len(self.tree_states),
                                                         self.root)
        return tw_fill(output, subsequent_indent='    ')

    def __len__(self):
        return len(self.tree_states)

    def index_of(self, s):
        return self._position[s]

    def label_set(self, node):
        return self.labels[node]

    def label_mask(self, node):
        return int(self.label_masks[self._position[node]])

    def successor(self, node, side):
        return self.left[node] if side == LEFT else self.right[node]

    def holds(self, node, name):
        """
        Whether the proposition `name` labels the tree-state `node`.
        """

        return name in self.labels[node]

    def with_root(self, root):
        return RegularTree(self.props, self.tree_states, self.labels, self.left, self.right, root)

    def states_at_level(self, level):
        """
        The set of tree-states that occur at the given level of the unfolding.
        """

        current = {self.root}
        for _ in range(level):
            current = {self.left[s] for s in current} | {self.right[s] for s in current}
        return current

    def reachable(self):
        seen = [self.root]
        queue = deque([self.root])
        while queue:
            s = queue.popleft()
            for succ in (self.left[s], self.right[s]):
                if succ not in seen:
                    seen.append(succ)
                    queue.append(succ)
        return seen


class PrefixTree(object):
    """
    The depth-d unfolding of a tree: levels 0 through d are labeled and the
    children of level-d nodes are cutoffs.  Level k is stored as a numpy
    array of 2^k label bitmasks (bit i set when props[i] holds), with the
    children of entry j at entries 2j and 2j+1 of the next level.
    """

    def __init__(self, props, levels):
        self.props = list(props)
        self.levels = [np.asarray(level, dtype=np.uint64) for level in levels]
        if len(self.levels) == 0:
            raise TreeFormatError("a prefix needs at least one level")
        for k, level in enumerate(self.levels):
            if level.size != 2**k:
                raise TreeFormatError("level %i has %i nodes instead of %i" % (k, level.size, 2**k))

    def __repr__(self):
        output = "<%s props=%s, depth=%i>" % (type(self).__name__, self.props, self.depth)
        return tw_fill(output, subsequent_indent='    ')

    def __eq__(self, other):
        return (isinstance(other, PrefixTree)
                and self.props == other.props
                and len(self.levels) == len(other.levels)
                and all(np.array_equal(a, b) for a, b in zip(self.levels, other.levels)))

    @property
    def depth(self):
        return len(self.levels) - 1

    @property
    def root(self):
        return (0, 0)

    @property
    def n_nodes(self):
        return 2**len(self.levels) - 1

    def label_set(self, node):
        level, index = node
        mask = int(self.levels[level][index])
        return frozenset([p for i, p in enumerate(self.props) if mask & (1 << i)])

    def successor(self, node, side):
        level, index = node
        if level >= self.depth:
            raise IndexError("cutoff below level %i" % self.depth)
        return (level+1, 2*index+side)

    def restrict(self, depth):
        """
        The prefix cut at a smaller depth.
        """

        if depth > self.depth:
            raise ValueError(f"cannot restrict a depth-{self.depth} prefix to depth {depth}")
        return PrefixTree(self.props, self.levels[:depth+1])

    def label_counts(self):
        """
        Number of labels on every node, level by level.
        """

        counts = []
        for level in self.levels:
            c = np.zeros(level.shape, dtype=np.int64)
            for i in range(len(self.props)):
                c += ((level >> np.uint64(i)) & np.uint64(1)).astype(np.int64)
            counts.append(c)
        return counts

    @property
    def is_single_labeled(self):
        """
        Whether every node carries exactly one proposition.
        """

        return all(bool(np.all(c == 1)) for c in self.label_counts())


@total_ordering
class DyadicDistance(object):
    """
    Distance 2^-i between two trees.  Exact(i) means the trees agree below
    level i and differ on level i; AtMost(i) means no difference was found
    on levels 0 through i-1.
    """

    exact = None

    def __init__(self, level):
        if level < 0:
            raise ValueError("distance levels are non-negative")
        self.level = int(level)

    def __repr__(self):
        return "%s(%i)" % (type(self).__name__, self.level)

    @property
    def value(self):
        return 2.0**-self.level

    def _key(self):
        return (-self.level, 1 if self.exact else 0)

    def __eq__(self, other):
        return isinstance(other, DyadicDistance) and self._key() == other._key()

    def __lt__(self, other):
        return self._key() < other._key()

    def __hash__(self):
        return hash(self._key())


class Exact(DyadicDistance):
    exact = True


class AtMost(DyadicDistance):
    exact = False


TREE_GRAMMAR = r'''
tree_file: props_decl? root_decl node_decl+
props_decl: "props" NAME*
root_decl: "root" NAME
node_decl: "node" NAME "{" "labels" NAME* ";" "left" NAME ";" "right" NAME "}"

NAME: /[A-Za-z_][A-Za-z0-9_']*/
COMMENT: /\/\/[^\n]*/

%import common.WS
%ignore WS
%ignore COMMENT
'''


class _TreeBuilder(L.Transformer):
    def tree_file(self, c):
        return list(c)

    def props_decl(self, c):
        return ('props', [str(t) for t in c])

    def root_decl(self, c):
        return ('root', str(c[0]))

    def node_decl(self, c):
        name = c[0]
        labels = [str(t) for t in c[1:-2]]
        return ('node', str(name), labels, str(c[-2]), str(c[-1]), name.line, name.column)


_TREE_PARSER = L.Lark(TREE_GRAMMAR, start='tree_file', parser='lalr')


def load_tree(text):
    """
    Load a regular tree from the tree file format.  Without a `props` line
    the proposition set is the labels in order of first use.
    """

    decls = run_parser(_TREE_PARSER, text, _TreeBuilder())
    props, root = None, None
    names, labels, left, right = [], {}, {}, {}
    for decl in decls:
        if decl[0] == 'props':
            props = decl[1]
        elif decl[0] == 'root':
            root = decl[1]
        else:
            _, name, node_labels, l, r, line, column = decl
            if name in labels:
                raise ParseError(f"duplicate node '{name}'", line, column)
            if props is not None:
                for p in node_labels:
                    if p not in props:
                        raise TreeFormatError(f"node '{name}' uses unknown proposition '{p}'")
            names.append(name)
            labels[name] = node_labels
            left[name] = l
            right[name] = r
    if props is None:
        props = []
        for name in names:
            for p in labels[name]:
                if p not in props:
                    props.append(p)
    t = RegularTree(props, names, labels, left, right, root)
    trees_logger.debug("Loaded tree with %i states over %s", len(t), t.props)
    return t


def dump_tree(t):
    """
    Serialize a regular tree in the tree file format.  Labels print in
    proposition declaration order.
    """

    from krivine_automata.filewriter import render_template

    nodes = []
    for s in t.tree_states:
        nodes.append({'name': s,
                      'labels': [p for p in t.props if p in t.labels[s]],
                      'left': t.left[s],
                      'right': t.right[s]})
    return render_template('tree.j2', props=t.props, root=t.root, nodes=nodes)


def prefix(t, depth, caps=None):
    """
    Unfold `t` (a regular tree, a prefix or a lazy tree handle) to the given
    depth.
    """

    if depth < 0:
        raise ValueError("prefix depth must be non-negative")
    if caps is None:
        caps = Caps()
    caps.check('depth', depth)

    if isinstance(t, PrefixTree):
        return t.restrict(depth)

    if isinstance(t, RegularTree):
        current = np.array([t.index_of(t.root)], dtype=np.int64)
        levels = [t.label_masks[current]]
        for _ in range(depth):
            nxt = np.empty(2*current.size, dtype=np.int64)
            nxt[0::2] = t.left_index[current]
            nxt[1::2] = t.right_index[current]
            current = nxt
            levels.append(t.label_masks[current])
        return PrefixTree(t.props, levels)

    # Generic handles
    current = [t.root]
    levels = [np.array([_props_mask(t.props, t.label_set(t.root))], dtype=np.uint64)]
    for _ in range(depth):
        nxt = []
        for node in current:
            nxt.append(t.successor(node, LEFT))
            nxt.append(t.successor(node, RIGHT))
        current = nxt
        levels.append(np.array([_props_mask(t.props, t.label_set(node)) for node in current], dtype=np.uint64))
    return PrefixTree(t.props, levels)


def distance(a, b, cap, caps=None):
    """
    Dyadic distance between two trees: Exact(i) for the first level i < cap
    on which they differ, AtMost(cap) otherwise.  Prefixes can only witness
    agreement down to their own depth.
    """

    if list(a.props) != list(b.props):
        raise TreeFormatError("trees are over different proposition sets: %s vs. %s" % (a.props, b.props))
    if cap <= 0:
        return AtMost(0)

    if isinstance(a, RegularTree) and isinstance(b, RegularTree):
        # Breadth-first over the product of the two tree-state sets
        start = (a.root, b.root)
        seen = {start}
        frontier = [start]
        for level in range(cap):
            nxt = []
            for sa, sb in frontier:
                if a.labels[sa] != b.labels[sb]:
                    return Exact(level)
                for side in (LEFT, RIGHT):
                    pair = (a.successor(sa, side), b.successor(sb, side))
                    if pair not in seen:
                        seen.add(pair)
                        nxt.append(pair)
            if not nxt:
                break
            frontier = nxt
        return AtMost(cap)

    limit = cap
    for t in (a, b):
        if isinstance(t, PrefixTree):
            limit = min(limit, t.depth+1)
    pa = prefix(a, limit-1, caps=caps)
    pb = prefix(b, limit-1, caps=caps)
    for level, (la, lb) in enumerate(zip(pa.levels, pb.levels)):
        if not np.array_equal(la, lb):
            return Exact(level)
    return AtMost(limit)


def _format_labels(props, mask, single_label):
    names = [p for i, p in enumerate(props) if mask & (1 << i)]
    if single_label and len(names) == 1:
        return names[0]
    return '(' + ' '.join(names) + ')'


def format_prefix(p, single_label=False):
    """
    Render a prefix as an s-expression `(<labels> <left> <right>)` with `#`
    for cutoffs.  With `single_label`, nodes carrying exactly one
    proposition print it bare.
    """

    props = p.props
    levels = [[int(m) for m in level] for level in p.levels]

    # Build the strings bottom-up so deep prefixes do not recurse
    below = ['#'] * (2**len(levels))
    for level in reversed(levels):
        current = []
        for j, mask in enumerate(level):
            current.append('(' + _format_labels(props, mask, single_label)
                           + ' ' + below[2*j] + ' ' + below[2*j+1] + ')')
        below = current
    return below[0]


def dump_prefix(p, single_label=False):
    from krivine_automata.filewriter import render_template
    return render_template('prefix.j2', props=p.props, sexpr=format_prefix(p, single_label=single_label))


PREFIX_GRAMMAR = r'''
prefix_file: props_decl? node
props_decl: "props" NAME*
?node: "#"                              -> cutoff
     | "(" labels node node ")"         -> branch
labels: "(" NAME* ")"
      | NAME

NAME: /[A-Za-z_][A-Za-z0-9_']*/
COMMENT: /\/\/[^\n]*/

%import common.WS
%ignore WS
%ignore COMMENT
'''


class _PrefixBuilder(L.Transformer):
    def prefix_file(self, c):
        return list(c)

    def props_decl(self, c):
        return ('props', [str(t) for t in c])

    def cutoff(self, c):
        return None

    def branch(self, c):
        return (c[0], c[1], c[2])

    def labels(self, c):
        return [str(t) for t in c]


_PREFIX_PARSER = L.Lark(PREFIX_GRAMMAR, start='prefix_file', parser='lalr')


def load_prefix(text):
    """
    Load a prefix from its s-expression form, optionally preceded by a
    `props` line.  All cutoffs must sit on one level.
    """

    parts = run_parser(_PREFIX_PARSER, text, _PrefixBuilder())
    if len(parts) == 2:
        props, root = parts[0][1], parts[1]
    else:
        props, root = None, parts[0]
    if root is None:
        raise TreeFormatError("a prefix needs at least one labeled node")

    rows = []
    frontier = [root]
    while True:
        if all(node is None for node in frontier):
            break
        if any(node is None for node in frontier):
            raise TreeFormatError("cutoffs are not on a uniform level")
        rows.append([node[0] for node in frontier])
        frontier = [child for node in frontier for child in (node[1], node[2])]

    if props is None:
        props = []
        for row in rows:
            for labels in row:
                for name in labels:
                    if name not in props:
                        props.append(name)
    levels = []
    for row in rows:
        for labels in row:
            for name in labels:
                if name not in props:
                    raise TreeFormatError(f"unknown proposition '{name}'")
        levels.append(np.array([_props_mask(props, labels) for labels in row], dtype=np.uint64))
    return PrefixTree(props, levels)


def _fresh(base, taken):
    name = base
    while name in taken:
        name += "'"
    taken.add(name)
    return name


def perturb_at_level(t, level, name):
    """
    A regular tree that agrees with `t` on all levels below `level` and toggles
    proposition `name` on every level-`level` node that is an occurrence of the
    first tree-state (in declaration order) found on that level.  The result
    is at distance Exact(level) from `t`.
    """

    if name not in t.props:
        raise TreeFormatError(f"unknown proposition '{name}'")
    if level < 0:
        raise ValueError("level must be non-negative")

    on_level = t.states_at_level(level)
    target = [s for s in t.tree_states if s in on_level][0]

    taken = set(t.tree_states)
    states = list(t.tree_states)
    labels = dict(t.labels)
    left = dict(t.left)
    right = dict(t.right)

    toggled = _fresh(f"{target}_T", taken)
    states.append(toggled)
    labels[toggled] = t.labels[target] ^ {name}
    left[toggled] = t.left[target]
    right[toggled] = t.right[target]

    # Level-tagged copies of the levels above, routing into the toggled copy
    copies = {}
    for k in range(level):
        for s in t.tree_states:
            if s in t.states_at_level(k):
                copies[(k, s)] = _fresh(f"{s}_L{k}", taken)
                states.append(copies[(k, s)])
                labels[copies[(k, s)]] = t.labels[s]

    def _route(k, s):
        if k == level:
            return toggled if s == target else s
        return copies[(k, s)]

    for (k, s), c in copies.items():
        left[c] = _route(k+1, t.left[s])
        right[c] = _route(k+1, t.right[s])

    return RegularTree(t.props, states, labels, left, right, _route(0, t.root))


def all_regular_trees(props, max_states):
    """
    Enumerate every regular tree over `props` with 1 to `max_states`
    tree-states named n0, n1, ... and rooted at n0.
    """

    props = list(props)
    label_sets = []
    for r in range(len(props)+1):
        label_sets.extend(itertools.combinations(props, r))
    for n in range(1, max_states+1):
        names = ['n%i' % i for i in range(n)]
        for labels in itertools.product(label_sets, repeat=n):
            for succ in itertools.product(range(n), repeat=2*n):
                left = {names[i]: names[succ[2*i]] for i in range(n)}
                right = {names[i]: names[succ[2*i+1]] for i in range(n)}
                yield RegularTree(props, names, dict(zip(names, labels)), left, right, names[0])
