import logging
from textwrap import fill as tw_fill

import numpy as np

from krivine_automata.config import Caps, CapExceeded
from krivine_automata.syntax import *
from krivine_automata.apka import validate

__all__ = ['FunctionValue', 'SemanticDomain', 'eval_hfl', 'check_hfl', 'solve_apka',
           'check_apka', 'members']


denot_logger = logging.getLogger('__main__')


class FunctionValue(object):
    """
    Monotone function value at an arrow type.  Results are computed only when
    an argument is demanded and memoized by the argument's key; key() gives
    the full table over the enumerated operand lattice.
    """

    def __init__(self, domain, t, fn):
        self.domain = domain
        self.t = t
        self._fn = fn
        self._memo = {}
        self._key = None

    def __repr__(self):
        output = "<%s type=%s, memoized=%i>" % (type(self).__name__,
                                                 format_type(self.t),
                                                 len(self._memo))
        return tw_fill(output, subsequent_indent='    ')

    def __call__(self, arg):
        k = self.domain.key(arg)
        try:
            return self._memo[k]
        except KeyError:
            value = self._fn(arg)
            self._memo[k] = value
            return value

    def key(self):
        if self._key is None:
            self._key = tuple(self.domain.key(self(x)) for x in self.domain.elements(self.t.operand))
        return self._key

    @classmethod
    def constant(cls, domain, t, value):
        return cls(domain, t, lambda x: value)

    @classmethod
    def from_table(cls, domain, t, table):
        """
        Function given by its values, listed in the enumeration order of the
        operand lattice.
        """

        lookup = {domain.key(x): v for x, v in zip(domain.elements(t.operand), table)}
        fv = cls(domain, t, lambda x: lookup[domain.key(x)])
        fv._memo.update(lookup)
        return fv


class SemanticDomain(object):
    """
    The lattices over a regular tree: ground values are bitmasks over the
    tree-states, function values are FunctionValue instances.  Lattice
    enumeration is cached per type and bounded by the 'lattice' cap.
    """

    def __init__(self, tree, caps=None):
        if caps is None:
            caps = Caps()
        self.tree = tree
        self.caps = caps
        self.n = len(tree.tree_states)
        caps.check('states', self.n)
        self.full = (1 << self.n) - 1
        self._weights = np.array([1 << i for i in range(self.n)], dtype=object)
        self._shifts = np.arange(self.n, dtype=np.int64)
        self._elements = {}

        self.prop_masks = {}
        for j, name in enumerate(tree.props):
            bit = np.uint64(1 << j)
            hits = (tree.label_masks & bit) != 0
            self.prop_masks[name] = self._from_bits(hits)

    def __repr__(self):
        output = "<%s tree_states=%i, cached_types=%s>" % (type(self).__name__,
                                                             self.n,
                                                             [format_type(t) for t in self._elements])
        return tw_fill(output, subsequent_indent='    ')

    def _to_bits(self, mask):
        return np.array([(mask >> int(i)) & 1 for i in self._shifts], dtype=bool)

    def _from_bits(self, bits):
        return int(sum(self._weights[np.asarray(bits, dtype=bool)]))

    def key(self, value):
        if isinstance(value, FunctionValue):
            return value.key()
        return value

    def bottom(self, t):
        if t.is_ground:
            return 0
        return FunctionValue.constant(self, t, self.bottom(t.result))

    def top(self, t):
        if t.is_ground:
            return self.full
        return FunctionValue.constant(self, t, self.top(t.result))

    def leq(self, t, a, b):
        if t.is_ground:
            return a & ~b == 0
        return all(self.leq(t.result, a(x), b(x)) for x in self.elements(t.operand))

    def join(self, t, a, b):
        if t.is_ground:
            return a | b
        return FunctionValue(self, t, lambda x: self.join(t.result, a(x), b(x)))

    def meet(self, t, a, b):
        if t.is_ground:
            return a & b
        return FunctionValue(self, t, lambda x: self.meet(t.result, a(x), b(x)))

    def elements(self, t):
        """
        Every element of the monotone lattice at type `t`.
        """

        try:
            return self._elements[t]
        except KeyError:
            pass

        if t.is_ground:
            self.caps.check('lattice', 1 << self.n)
            values = list(range(1 << self.n))
        else:
            values = [FunctionValue.from_table(self, t, table) for table in self._monotone_tables(t)]
        self._elements[t] = values
        return values

    def _monotone_tables(self, t):
        dom = self.elements(t.operand)
        cod = self.elements(t.result)
        m = len(dom)
        below = [[j for j in range(i) if self.leq(t.operand, dom[j], dom[i])] for i in range(m)]
        above = [[j for j in range(i) if self.leq(t.operand, dom[i], dom[j])] for i in range(m)]

        tables = []
        table = [None]*m

        def _fill(i):
            if i == m:
                tables.append(tuple(table))
                if len(tables) > self.caps.lattice:
                    raise CapExceeded('lattice', self.caps.lattice, len(tables))
                return
            for v in cod:
                if all(self.leq(t.result, table[j], v) for j in below[i]) \
                   and all(self.leq(t.result, v, table[j]) for j in above[i]):
                    table[i] = v
                    _fill(i+1)
            table[i] = None

        _fill(0)
        return tables

    def is_monotone(self, t, value, samples=None):
        """
        Spot-check monotonicity of a value on pairs of operand elements
        (all pairs unless `samples` limits them).
        """

        if t.is_ground:
            return True
        dom = self.elements(t.operand)
        pairs = [(x, y) for x in dom for y in dom if self.leq(t.operand, x, y)]
        if samples is not None:
            pairs = pairs[:samples]
        for x, y in pairs:
            if not self.leq(t.result, value(x), value(y)):
                return False
            if not self.is_monotone(t.result, value(x), samples):
                return False
        return True

    def pre_exists(self, mask):
        bits = self._to_bits(mask)
        return self._from_bits(bits[self.tree.left_index] | bits[self.tree.right_index])

    def pre_forall(self, mask):
        bits = self._to_bits(mask)
        return self._from_bits(bits[self.tree.left_index] & bits[self.tree.right_index])

    def prop_mask(self, name):
        try:
            return self.prop_masks[name]
        except KeyError:
            # Propositions outside the tree's set hold nowhere
            return 0

    def fixpoint(self, t, least, step):
        """
        Iterate `step` from the bottom (least) or the top (greatest) of the
        lattice at `t` until the value stabilizes.
        """

        current = self.bottom(t) if least else self.top(t)
        ckey = self.key(current)
        for i in range(self.caps.iterations):
            nxt = step(current)
            nkey = self.key(nxt)
            if nkey == ckey:
                return nxt
            current, ckey = nxt, nkey
        raise CapExceeded('iterations', self.caps.iterations)


def members(tree, mask):
    """
    Tree-state names contained in a ground value.
    """

    return [s for i, s in enumerate(tree.tree_states) if (mask >> i) & 1]


def _fixpoint_types(f, types, caps):
    # Only fixpoints enumerate their lattice; lambdas are applied lazily
    for node in f.walk():
        if node.kind in (MU, NU):
            caps.check_type(types[node.nid])


def _evaluate(domain, node, lvals, fvals, types):
    k = node.kind
    if k == TRUE:
        return domain.full
    elif k == FALSE:
        return 0
    elif k == PROP:
        return domain.prop_mask(node.name)
    elif k == NEGPROP:
        return domain.full & ~domain.prop_mask(node.name)
    elif k == OR:
        return _evaluate(domain, node.left, lvals, fvals, types) | _evaluate(domain, node.right, lvals, fvals, types)
    elif k == AND:
        return _evaluate(domain, node.left, lvals, fvals, types) & _evaluate(domain, node.right, lvals, fvals, types)
    elif k == DIAMOND:
        return domain.pre_exists(_evaluate(domain, node.child, lvals, fvals, types))
    elif k == BOX:
        return domain.pre_forall(_evaluate(domain, node.child, lvals, fvals, types))
    elif k == VAR:
        try:
            return lvals[node.name]
        except KeyError:
            raise UnboundVariable(f"unbound lambda variable '{node.name}'")
    elif k == FIXVAR:
        try:
            return fvals[node.name]
        except KeyError:
            raise UnboundVariable(f"unbound fixpoint variable '{node.name}'")
    elif k == APP:
        op = _evaluate(domain, node.left, lvals, fvals, types)
        return op(_evaluate(domain, node.right, lvals, fvals, types))
    elif k == LAMBDA:
        def _body(x, node=node, lvals=lvals):
            inner = dict(lvals)
            inner[node.name] = x
            return _evaluate(domain, node.body, inner, fvals, types)
        return FunctionValue(domain, types[node.nid], _body)
    elif k in (MU, NU):
        def _step(d, node=node):
            inner = dict(fvals)
            inner[node.name] = d
            return _evaluate(domain, node.body, lvals, inner, types)
        return domain.fixpoint(node.var_type, k == MU, _step)
    raise ValueError(f"unknown formula kind '{k}'")


def _value_type(domain, value):
    if isinstance(value, FunctionValue):
        return value.t
    return PR


def eval_hfl(st, eta, f, caps=None, domain=None):
    """
    Denotation of `f` over the regular tree `st` under the interpretation
    `eta` (variable name -> value).  Bindings for names that do not occur
    free in `f` are ignored.
    """

    if domain is None:
        domain = SemanticDomain(st, caps)
    eta = dict(eta or {})
    free_l, free_x = free_variables(f)
    lvals = {name: eta[name] for name in free_l if name in eta}
    fvals = {name: eta[name] for name in free_x if name in eta}
    ctx = TypingContext({k: _value_type(domain, v) for k, v in lvals.items()},
                        {k: _value_type(domain, v) for k, v in fvals.items()})
    types = {}
    typecheck(ctx, f, dialect='hfl', annotate=types)
    _fixpoint_types(f, types, domain.caps)
    return _evaluate(domain, f, lvals, fvals, types)


def check_hfl(st, node, f, caps=None):
    """
    Whether the closed ground formula `f` holds at tree-state `node`.
    """

    t = typecheck(TypingContext(), f, dialect='hfl')
    if t != PR:
        raise TypeMismatch("formula has type %s where Pr is required" % format_type(t))
    mask = eval_hfl(st, {}, f, caps=caps)
    return bool((mask >> st.index_of(node)) & 1)


def _state_value(domain, a, x, fvals, types):
    """
    The function Lambda(args).delta(x) under the state values `fvals`.
    """

    sig = a.lambda_sig[x]
    body = a.delta[x]

    def _curry(i, lvals):
        if i == len(sig):
            return _evaluate(domain, body, lvals, fvals, types)
        name, _ = sig[i]
        t = make_type([t for _, t in sig[i:]])

        def _next(v, i=i, lvals=lvals, name=name):
            inner = dict(lvals)
            inner[name] = v
            return _curry(i+1, inner)
        return FunctionValue(domain, t, _next)

    return _curry(0, {})


def solve_apka(st, a, caps=None, domain=None, log=None):
    """
    Solve the hierarchical equation system of the automaton over `st`:
    states are grouped by priority, the highest priority is the outermost
    fixpoint, odd priorities are least and even ones greatest fixpoints.
    Caps.iterations bounds the rounds of each priority group separately.
    Returns a dictionary state -> value.
    """

    if log is None:
        log = denot_logger
    report = validate(a)
    if not report.ok:
        raise ValueError("automaton does not validate: %s" % '; '.join(report.violations))
    if domain is None:
        domain = SemanticDomain(st, caps)
    for x in a.states:
        domain.caps.check_type(a.state_type[x])

    types = {}
    ctx = a.context()
    for x in a.states:
        args = ctx
        for name, t in a.lambda_sig[x]:
            args = args.with_lambda(name, t)
        typecheck(args, a.delta[x], dialect='apka-body', annotate=types)

    order = sorted(range(len(a.states)), key=lambda i: (-a.priority[a.states[i]], i))
    groups = []
    for i in order:
        x = a.states[i]
        if groups and a.priority[groups[-1][0]] == a.priority[x]:
            groups[-1].append(x)
        else:
            groups.append([x])
    total = [0]

    def _solve(level, outer):
        if level == len(groups):
            return {}
        group = groups[level]
        least = a.priority[group[0]] % 2 == 1
        current = {x: (domain.bottom if least else domain.top)(a.state_type[x]) for x in group}
        keys = {x: domain.key(v) for x, v in current.items()}
        rounds = 0
        while True:
            rounds += 1
            total[0] += 1
            if rounds > domain.caps.iterations:
                raise CapExceeded('iterations', domain.caps.iterations, rounds)
            env = dict(outer)
            env.update(current)
            inner = _solve(level+1, env)
            env.update(inner)
            nxt = {x: _state_value(domain, a, x, env, types) for x in group}
            nkeys = {x: domain.key(v) for x, v in nxt.items()}
            if nkeys == keys:
                result = dict(current)
                result.update(inner)
                return result
            current, keys = nxt, nkeys

    solution = _solve(0, {})
    log.debug("Solved %i states over %i tree-states in %i iterations", len(a.states), domain.n, total[0])
    return solution


def check_apka(st, node, a, caps=None):
    """
    Whether the automaton accepts the tree `st` rooted at tree-state `node`.
    """

    solution = solve_apka(st, a, caps=caps)
    value = solution[a.init]
    if isinstance(value, FunctionValue):
        raise TypeMismatch("initial state %s has type %s where Pr is required" % (a.init, format_type(value.t)))
    return bool((value >> st.index_of(node)) & 1)
