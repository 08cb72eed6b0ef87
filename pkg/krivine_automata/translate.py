import logging
import itertools

from krivine_automata.syntax import *
from krivine_automata.apka import Apka, validate

__all__ = ['TranslationError', 'UnsupportedPrecedence', 'copy_fresh', 'hfl_to_apka',
           'apka_to_hfl']


translate_logger = logging.getLogger('__main__')


class TranslationError(ValueError):
    """
    The formula or automaton is outside what a translation accepts.
    """


class UnsupportedPrecedence(ValueError):
    """
    Eliminating states would put the fixpoint for `operator` in operator
    position inside the lower-priority fixpoint `enclosing`.
    """

    def __init__(self, operator, enclosing, operator_priority, enclosing_priority):
        self.operator = operator
        self.enclosing = enclosing
        msg = "fixpoint %s (priority %i) would be applied inside %s (priority %i)" % (operator, operator_priority,
                                                                                       enclosing, enclosing_priority)
        ValueError.__init__(self, msg)


class _FreshNames(object):
    """
    Deterministic fresh names '<prefix><k>' that avoid a set of taken names.
    """

    def __init__(self, taken=()):
        self.taken = set(taken)
        self._counters = {}

    def __call__(self, prefix):
        counter = self._counters.setdefault(prefix, itertools.count())
        while True:
            name = '%s%i' % (prefix, next(counter))
            if name not in self.taken:
                self.taken.add(name)
                return name

    def variant(self, name):
        if name not in self.taken:
            self.taken.add(name)
            return name
        k = 1
        while '%s_%i' % (name, k) in self.taken:
            k += 1
        name = '%s_%i' % (name, k)
        self.taken.add(name)
        return name


def copy_fresh(f, taken=None):
    """
    Copy `f` with plain (position-free) variables and binder names made
    unique: the first binder of a name keeps it, later ones are renamed
    apart.  The result is well-named.
    """

    names = _FreshNames(taken or ())

    def _copy(node, lmap, xmap):
        k = node.kind
        if k == VAR:
            return lvar(lmap.get(node.name, node.name))
        elif k == FIXVAR:
            return svar(xmap.get(node.name, node.name))
        elif node.is_binder:
            new = names.variant(node.name)
            if k == LAMBDA:
                lmap = dict(lmap)
                lmap[node.name] = new
            else:
                xmap = dict(xmap)
                xmap[node.name] = new
            return Formula(k, name=new, children=(_copy(node.body, lmap, xmap),), var_type=node.var_type)
        return Formula(k, name=node.name, children=[_copy(c, lmap, xmap) for c in node.children])

    return _copy(f, {}, {})


def _binder_names(f):
    return {node.name for node in f.walk() if node.is_binder}


def _pad(node, types, names, pads, in_prefix=False):
    # Every lambda that does not continue the lambda prefix of a fixpoint gets
    # a vacuous greatest fixpoint around it
    k = node.kind
    if k in (MU, NU):
        return Formula(k, name=node.name, var_type=node.var_type,
                       children=(_pad(node.body, types, names, pads, True),))
    elif k == LAMBDA:
        inner = Formula(LAMBDA, name=node.name, var_type=node.var_type,
                        children=(_pad(node.body, types, names, pads, True),))
        if in_prefix:
            return inner
        name = names('_pad')
        pads.add(name)
        return nu(name, types[node.nid], inner)
    if not node.children:
        return clone(node)
    return Formula(k, name=node.name, children=[_pad(c, types, names, pads) for c in node.children])


def _prefix(fixpoint):
    """
    Split a fixpoint body into its lambda prefix [(name, type)] and the rest.
    """

    args = []
    body = fixpoint.body
    while body.kind == LAMBDA:
        args.append((body.name, body.var_type))
        body = body.body
    return args, body


def _with_prefix(args, body):
    for name, t in reversed(args):
        body = lam(name, t, body)
    return body


def _apply(head, args):
    for a in args:
        head = app(head, a)
    return head


def _free_in_order(f):
    """
    Free lambda variables in order of first occurrence.
    """

    free, _ = free_variables(f)
    seen = []
    for node in f.walk():
        if node.kind == VAR and node.name in free and node.name not in seen:
            seen.append(node.name)
    return seen


def _abstract(node, scope, names):
    # Lambda variables bound outside a fixpoint become extra leading
    # arguments of that fixpoint, which is then applied to them
    k = node.kind
    if k in (MU, NU):
        free = _free_in_order(node)
        if free:
            fresh = [names('_cl') for _ in free]
            new_type = make_type([scope[y] for y in free] + node.var_type.operands)
            var_map = {y: lvar(z) for y, z in zip(free, fresh)}
            fix_map = {node.name: _apply(svar(node.name), [lvar(z) for z in fresh])}
            body = substitute(node.body, fix_map=fix_map, var_map=var_map)
            body = _with_prefix([(z, scope[y]) for y, z in zip(free, fresh)], body)
            closed = Formula(k, name=node.name, var_type=new_type, children=(body,))
            return _apply(_abstract(closed, scope, names), [lvar(y) for y in free])
        return Formula(k, name=node.name, var_type=node.var_type,
                       children=(_abstract(node.body, scope, names),))
    elif k == LAMBDA:
        inner = dict(scope)
        inner[node.name] = node.var_type
        return Formula(k, name=node.name, var_type=node.var_type,
                       children=(_abstract(node.body, inner, names),))
    if not node.children:
        return clone(node)
    return Formula(k, name=node.name, children=[_abstract(c, scope, names) for c in node.children])


def _eta(node, names):
    k = node.kind
    if k in (MU, NU):
        args, body = _prefix(node)
        missing = node.var_type.operands[len(args):]
        body = _eta(body, names)
        if missing:
            extra = [(names('_arg'), t) for t in missing]
            body = _apply(body, [lvar(z) for z, _ in extra])
            args = args + extra
        return Formula(k, name=node.name, var_type=node.var_type,
                       children=(_with_prefix(args, body),))
    if not node.children:
        return clone(node)
    return Formula(k, name=node.name, var_type=node.var_type,
                   children=[_eta(c, names) for c in node.children])


def hfl_to_apka(f, init_name='I'):
    """
    Translate a closed, well-named HFL formula of ground type into an
    equivalent automaton.  Lambdas outside fixpoint prefixes are padded with
    vacuous fixpoints, lambda variables free in a fixpoint are abstracted,
    fixpoints are eta-expanded, and every fixpoint becomes a state.  The
    initial state wraps the top-level formula.
    """

    binding = analyze_binding(f)
    if not binding.closed:
        raise TranslationError("formula is not closed (free: %s)" % ', '.join(sorted(binding.free_lambda | binding.free_fixpoints)))
    if not binding.well_named:
        raise TranslationError("formula is not well-named")
    types = {}
    t = typecheck(TypingContext(), f, dialect='hfl', annotate=types)
    if t != PR:
        raise TranslationError("formula has type %s where Pr is required" % format_type(t))

    names = _FreshNames(_binder_names(f))
    pads = set()
    g = _pad(f, types, names, pads)
    g = _abstract(g, {}, names)
    g = _eta(g, names)

    init = names.variant(init_name)
    states, sigs, deltas, kinds, stypes = [init], {init: []}, {}, {init: None}, {init: PR}
    nested = {init: []}

    def _strip(node, owner, args, parents):
        k = node.kind
        if k in (MU, NU):
            x = node.name
            sargs, body = _prefix(node)
            states.append(x)
            sigs[x] = sargs
            kinds[x] = k
            stypes[x] = node.var_type
            nested[x] = []
            for p in parents:
                nested[p].append(x)
            deltas[x] = _strip(body, x, [n for n, _ in sargs], parents + [x])
            return svar(x)
        elif k == VAR:
            try:
                return lvar(node.name, owner, args.index(node.name))
            except ValueError:
                raise TranslationError(f"lambda variable '{node.name}' escaped its fixpoint")
        elif k == LAMBDA:
            raise TranslationError("lambda outside a fixpoint prefix")
        if not node.children:
            return clone(node)
        return Formula(k, name=node.name, children=[_strip(c, owner, args, parents) for c in node.children])

    deltas[init] = _strip(g, init, [], [init])

    # Bottom-up: no lower than any fixpoint inside, odd for mu, even for nu
    priority = {}

    def _assign(x):
        for y in nested[x]:
            if y not in priority:
                _assign(y)
        floor = max([priority[y] for y in nested[x]] + [0])
        if kinds[x] is None:
            p = floor
        elif kinds[x] == MU:
            p = floor if floor % 2 == 1 else floor + 1
        else:
            p = floor if floor % 2 == 0 else floor + 1
        priority[x] = p
        return p

    for x in reversed(states):
        if x not in priority:
            _assign(x)

    props = []
    for node in f.walk():
        if node.kind in (PROP, NEGPROP) and node.name not in props:
            props.append(node.name)

    a = Apka(states, sigs, priority, init, deltas, props=props, state_type=stypes)
    translate_logger.debug("Translated formula into %i states (%i padded)", len(states), len(pads))
    return a


def _plain(f):
    if f.kind == VAR:
        return lvar(f.name)
    if not f.children:
        return clone(f)
    return Formula(f.kind, name=f.name, var_type=f.var_type, children=[_plain(c) for c in f.children])


def _replace_state(f, name, replacement, priority):
    # Substitute the solution for `name`, refusing to put a higher-priority
    # fixpoint in operator position under a lower-priority one
    p = priority[name]

    def _walk(node, enclosing, head):
        k = node.kind
        if k == FIXVAR and node.name == name:
            if head:
                for b in enclosing:
                    if b in priority and priority[b] < p:
                        raise UnsupportedPrecedence(name, b, p, priority[b])
            return clone(replacement)
        if k in (MU, NU):
            if node.name == name:
                return node
            enclosing = enclosing + [node.name]
        if k == APP:
            return Formula(APP, children=(_walk(node.left, enclosing, True),
                                          _walk(node.right, enclosing, False)))
        if not node.children:
            return node
        return Formula(k, name=node.name, var_type=node.var_type,
                       children=[_walk(c, enclosing, False) for c in node.children])

    return _walk(f, [], False)


def _mentions(f, name):
    _, free = free_variables(f)
    return name in free


def apka_to_hfl(a):
    """
    Translate an automaton into a closed HFL formula by eliminating states
    in ascending priority order.  Each eliminated state X is replaced by
    sigma X. lambda args. body, sigma being mu for odd and nu for even
    priorities.  The initial state is unwrapped when nothing refers to it.
    """

    report = validate(a)
    if not report.ok:
        raise TranslationError("automaton does not validate: %s" % '; '.join(report.violations))

    position = {x: i for i, x in enumerate(a.states)}
    order = sorted(a.states, key=lambda x: (a.priority[x], position[x]))
    referenced = any(_mentions(a.delta[x], a.init) for x in a.states)
    if not referenced:
        order.remove(a.init)
        order.append(a.init)

    current = {x: _plain(a.delta[x]) for x in a.states}
    solved = {}
    for i, x in enumerate(order):
        body = current.pop(x)
        if x == a.init and i == len(order)-1 and not _mentions(body, x):
            solution = body
        else:
            kind = MU if a.priority[x] % 2 == 1 else NU
            solution = Formula(kind, name=x, var_type=a.state_type[x],
                               children=(_with_prefix(a.lambda_sig[x], body),))
        solved[x] = solution
        for y in current:
            if _mentions(current[y], x):
                current[y] = _replace_state(current[y], x, solution, a.priority)

    # Close a solution with the (closed) solutions of later states, on demand
    closed = {}

    def _close(x):
        if x not in closed:
            g = solved[x]
            for y in order[order.index(x)+1:]:
                if _mentions(g, y):
                    g = _replace_state(g, y, _close(y), a.priority)
            closed[x] = g
        return closed[x]

    result = copy_fresh(_close(a.init))
    translate_logger.debug("Translated %i states into a formula", len(a.states))
    return result
