import logging
from textwrap import fill as tw_fill

import lark as L

from krivine_automata.syntax import *
from krivine_automata.syntax import run_parser

__all__ = ['Apka', 'ValidationReport', 'ClassDescriptor', 'validate', 'complement',
           'descriptor', 'alternation_class', 'load_apka', 'dump_apka', 'APKA_GRAMMAR']


apka_logger = logging.getLogger('__main__')


class Apka(object):
    """
    Alternating parity Krivine automaton: ordered states, per-state lambda
    signatures, priorities, an initial state and one transition body per
    state.  The subformula table (state nodes first, then every body in
    preorder) gives each occurrence a stable index used by the machine and
    the game-tree encoder.
    """

    def __init__(self, states, lambda_sig, priority, init, delta, props=None, state_type=None):
        self.states = list(states)
        self.lambda_sig = {x: list(lambda_sig.get(x, [])) for x in self.states}
        self.priority = dict(priority)
        self.init = init
        self.delta = dict(delta)
        self.props = None if props is None else list(props)
        if state_type is None:
            state_type = {x: make_type([t for _, t in self.lambda_sig[x]]) for x in self.states}
        self.state_type = dict(state_type)
        self._build_table()

    def __repr__(self):
        output = "<%s states=%s, init=%s, priority=%s>" % (type(self).__name__,
                                                           self.states,
                                                           self.init,
                                                           self.priority)
        return tw_fill(output, subsequent_indent='    ')

    def _build_table(self):
        self.state_nodes = {x: svar(x) for x in self.states}
        self.formulas = []
        self._index = {}
        self._owner = {}
        self._end = {}
        for x in self.states:
            node = self.state_nodes[x]
            self._index[node.nid] = len(self.formulas)
            self._owner[node.nid] = None
            self._end[node.nid] = len(self.formulas) + 1
            self.formulas.append(node)
        for x in self.states:
            try:
                body = self.delta[x]
            except KeyError:
                continue
            self._number(body, x)

        # Types are best effort here; validate() reports the failures
        self._types = {}
        ctx = self.context()
        for x in self.states:
            if x not in self.delta:
                continue
            args = TypingContext(ctx.lambdas, ctx.fixpoints)
            for name, t in self.lambda_sig.get(x, []):
                args = args.with_lambda(name, t)
            try:
                typecheck(args, self.delta[x], dialect='apka-body', annotate=self._types)
            except (TypeMismatch, UnboundVariable, DialectViolation):
                pass
        for x, node in self.state_nodes.items():
            self._types[node.nid] = self.state_type.get(x)

    def _number(self, node, owner):
        start = len(self.formulas)
        self._index[node.nid] = start
        self._owner[node.nid] = owner
        self.formulas.append(node)
        for c in node.children:
            self._number(c, owner)
        self._end[node.nid] = len(self.formulas)

    def context(self):
        """
        Typing context with every state at its state type.
        """

        return TypingContext(fixpoints=self.state_type)

    def arity(self, state):
        return len(self.lambda_sig[state])

    def index_of(self, f):
        """
        Index of a subformula occurrence in the subformula table.
        """

        return self._index[f.nid]

    def type_of(self, f):
        return self._types.get(f.nid)

    def owner_of(self, f):
        """
        The state whose body contains `f`, or None for a state node.
        """

        return self._owner[f.nid]

    def is_proper_subformula(self, f, g):
        """
        Whether the occurrence `f` lies strictly inside the occurrence `g`.
        """

        i, j = self._index[f.nid], self._index[g.nid]
        return j < i < self._end[g.nid]

    def body_size(self, state):
        body = self.delta[state]
        return self._end[body.nid] - self._index[body.nid]

    @property
    def used_priorities(self):
        return sorted(set(self.priority.values()))

    @property
    def used_props(self):
        used = []
        for x in self.states:
            for node in self.delta.get(x, true()).walk():
                if node.kind in (PROP, NEGPROP) and node.name not in used:
                    used.append(node.name)
        return used


class ValidationReport(object):
    """
    Every structural problem found in an automaton; empty when it is well
    formed.
    """

    def __init__(self, violations=None):
        self.violations = list(violations or [])

    def __repr__(self):
        output = "<%s violations=%s>" % (type(self).__name__, self.violations)
        return tw_fill(output, subsequent_indent='    ')

    def __len__(self):
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)

    @property
    def ok(self):
        return len(self.violations) == 0

    def add(self, message):
        self.violations.append(message)


def validate(a):
    report = ValidationReport()

    if len(a.states) == 0:
        report.add("no states")
    if len(set(a.states)) != len(a.states):
        report.add("duplicate state names")
    if a.init not in a.states:
        report.add(f"init '{a.init}' is not a state")

    for x in a.states:
        if x not in a.delta:
            report.add(f"state '{x}' has no transition body")
        if x not in a.priority:
            report.add(f"state '{x}' has no priority")
        elif not isinstance(a.priority[x], int) or a.priority[x] < 0:
            report.add(f"state '{x}' has an invalid priority {a.priority[x]!r}")
        names = [name for name, _ in a.lambda_sig[x]]
        if len(set(names)) != len(names):
            report.add(f"state '{x}' declares duplicate arguments")
        expected = make_type([t for _, t in a.lambda_sig[x]])
        if a.state_type.get(x) != expected:
            report.add("state '%s' has type %s but its arguments give %s" % (x, a.state_type.get(x), expected))
    for x in a.delta:
        if x not in a.states:
            report.add(f"transition body for undeclared state '{x}'")

    if a.init in a.states and a.state_type.get(a.init) != PR:
        report.add("init not ground")

    # Bodies
    seen = set()
    ctx = a.context()
    for x in a.states:
        if x not in a.delta:
            continue
        body = a.delta[x]
        local = ctx
        for name, t in a.lambda_sig[x]:
            local = local.with_lambda(name, t)
        for node in body.walk():
            if node.nid in seen:
                report.add(f"state '{x}' shares a formula node with another body")
            seen.add(node.nid)
            if node.kind == VAR:
                names = [name for name, _ in a.lambda_sig[x]]
                if node.owner not in (None, x) or node.name not in names:
                    report.add(f"state '{x}' refers to lambda variable '{node.name}' it does not own")
                elif node.index is not None and names[node.index] != node.name:
                    report.add(f"state '{x}' has lambda variable '{node.name}' at the wrong position")
            if node.kind in (PROP, NEGPROP) and a.props is not None and node.name not in a.props:
                report.add(f"state '{x}' uses undeclared proposition '{node.name}'")
        try:
            t = typecheck(local, body, dialect='apka-body')
            if t != PR:
                report.add("body of state '%s' has type %s instead of Pr" % (x, format_type(t)))
        except (TypeMismatch, UnboundVariable, DialectViolation) as e:
            report.add(f"body of state '{x}': {str(e)}")

    # Priorities
    used = [p for p in a.used_priorities if isinstance(p, int)]
    if used:
        if used[0] not in (0, 1):
            report.add(f"priorities must start at 0 or 1, not {used[0]}")
        if used != list(range(used[0], used[-1]+1)):
            report.add(f"priorities {used} do not form a contiguous range")

    return report


def complement(a):
    """
    Dual automaton: priorities shifted up by one (renormalized so the range
    starts at 0 or 1), modalities, connectives and literals dualized.
    """

    shifted = {x: p+1 for x, p in a.priority.items()}
    low = min(shifted.values())
    low -= low % 2
    priority = {x: p-low for x, p in shifted.items()}
    delta = {x: dualize(body, fixpoints=False) for x, body in a.delta.items()}
    return Apka(a.states, a.lambda_sig, priority, a.init, delta,
                props=a.props, state_type=a.state_type)


class ClassDescriptor(object):
    """
    Syntactic alternation data of an automaton.
    """

    def __init__(self, index, max_parity, order):
        self.index = index
        self.max_parity = max_parity
        self.order = order

    def __repr__(self):
        output = "<%s index=%i, max_parity=%s, order=%i>" % (type(self).__name__,
                                                              self.index,
                                                              self.max_parity,
                                                              self.order)
        return tw_fill(output, subsequent_indent='    ')

    def __eq__(self, other):
        return (isinstance(other, ClassDescriptor)
                and (self.index, self.max_parity, self.order) == (other.index, other.max_parity, other.order))


def descriptor(a):
    used = a.used_priorities
    top = max(used)
    return ClassDescriptor(len(used),
                           'even' if top % 2 == 0 else 'odd',
                           max([a.state_type[x].order for x in a.states]))


def alternation_class(a):
    """
    Name of the syntactic alternation class: 'Sigma_n' when the highest
    priority is even, 'Pi_n' otherwise.
    """

    d = descriptor(a)
    return ('Sigma_%i' if d.max_parity == 'even' else 'Pi_%i') % d.index


APKA_GRAMMAR = FORMULA_GRAMMAR + r'''
apka_file: props_decl? init_decl state_decl+
props_decl: "props" NAME*
init_decl: "init" NAME
state_decl: "state" NAME ":" type "{" "prio" INT ";" args_decl? "body" form "}"
args_decl: "args" arg_decl ("," arg_decl)* ";"
arg_decl: NAME ":" type

INT: /[0-9]+/
'''


class _ApkaBuilder(RawBuilder):
    def apka_file(self, c):
        return list(c)

    def props_decl(self, c):
        return ('props', [str(t) for t in c])

    def init_decl(self, c):
        return ('init', str(c[0]))

    def state_decl(self, c):
        name, stype, prio = c[0], c[1], c[2]
        if len(c) == 5:
            args, body = c[3], c[4]
        else:
            args, body = [], c[3]
        return ('state', str(name), stype, int(prio), args, body, name.line, name.column)

    def args_decl(self, c):
        return list(c)

    def arg_decl(self, c):
        return (str(c[0]), c[1])


_APKA_PARSER = L.Lark(APKA_GRAMMAR, start='apka_file', parser='lalr')


def load_apka(text):
    """
    Load an automaton from the line-oriented APKA file format.
    """

    decls = run_parser(_APKA_PARSER, text, _ApkaBuilder())
    props, init = None, None
    states, sigs, prios, types, bodies = [], {}, {}, {}, {}
    for decl in decls:
        if decl[0] == 'props':
            props = decl[1]
        elif decl[0] == 'init':
            init = decl[1]
        else:
            _, name, stype, prio, args, body, line, column = decl
            if name in sigs:
                raise ParseError(f"duplicate state '{name}'", line, column)
            states.append(name)
            sigs[name] = args
            prios[name] = prio
            types[name] = stype
            bodies[name] = body

    delta = {}
    for x in states:
        resolver = Resolver(props=props, states=states, args=[n for n, _ in sigs[x]], owner=x)
        delta[x] = resolver.resolve(bodies[x])
    apka_logger.debug("Loaded automaton with %i states, init %s", len(states), init)
    return Apka(states, sigs, prios, init, delta, props=props, state_type=types)


def dump_apka(a):
    """
    Serialize an automaton in the APKA file format; output is determined by
    the declaration order alone.
    """

    from krivine_automata.filewriter import render_template

    states = []
    for x in a.states:
        states.append({'name': x,
                       'type': format_type(a.state_type[x]),
                       'prio': a.priority[x],
                       'args': ', '.join(['%s:%s' % (n, format_type(t)) for n, t in a.lambda_sig[x]]),
                       'body': format_formula(a.delta[x])})
    return render_template('apka.j2', props=a.props, init=a.init, states=states)
