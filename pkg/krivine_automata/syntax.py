import logging
import itertools
from textwrap import fill as tw_fill

import lark as L

__all__ = ['ParseError', 'TypeMismatch', 'UnboundVariable', 'DialectViolation',
           'SimpleType', 'GroundType', 'ArrowType', 'PR', 'make_type', 'order',
           'TRUE', 'FALSE', 'PROP', 'NEGPROP', 'DIAMOND', 'BOX', 'OR', 'AND',
           'VAR', 'FIXVAR', 'APP', 'LAMBDA', 'MU', 'NU',
           'Formula', 'true', 'false', 'prop', 'neg_prop', 'diamond', 'box',
           'disj', 'conj', 'lvar', 'svar', 'app', 'lam', 'mu', 'nu',
           'FORMULA_GRAMMAR', 'RawBuilder', 'Resolver', 'parse', 'parse_type',
           'format_type', 'format_formula', 'structurally_equal', 'clone',
           'dualize', 'substitute', 'free_variables', 'subformulas',
           'TypingContext', 'typecheck', 'formula_order',
           'BindingReport', 'analyze_binding']


syntax_logger = logging.getLogger('__main__')


class ParseError(ValueError):
    """
    Syntax error in one of the text formats, annotated with the line and
    column of the offending token when they are known.
    """

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None and line > 0:
            message = "line %i, column %i: %s" % (line, column, message)
        ValueError.__init__(self, message)


class TypeMismatch(TypeError):
    pass


class UnboundVariable(NameError):
    pass


class DialectViolation(ValueError):
    pass


class SimpleType(object):
    """
    Base class for the simple types Pr and t1 -> t2.
    """

    __slots__ = ()

    @property
    def is_ground(self):
        return isinstance(self, GroundType)

    @property
    def operands(self):
        """
        The operand types t1, ..., tn of the normal form t1 -> ... -> tn -> Pr.
        """

        ops = []
        t = self
        while isinstance(t, ArrowType):
            ops.append(t.operand)
            t = t.result
        return ops

    @property
    def arity(self):
        return len(self.operands)

    @property
    def order(self):
        ops = self.operands
        if not ops:
            return 0
        return max([op.order for op in ops]) + 1

    def __str__(self):
        return format_type(self)


class GroundType(SimpleType):
    """
    The ground type Pr of sets of tree nodes.  There is a single instance, PR.
    """

    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = object.__new__(cls)
        return cls._instance

    def __eq__(self, other):
        return isinstance(other, GroundType)

    def __hash__(self):
        return hash('Pr')

    def __repr__(self):
        return 'Pr'


class ArrowType(SimpleType):
    """
    The function type operand -> result.
    """

    __slots__ = ('operand', 'result', '_hash')

    def __init__(self, operand, result):
        if not isinstance(operand, SimpleType) or not isinstance(result, SimpleType):
            raise TypeError("Expected SimpleType instances")
        self.operand = operand
        self.result = result
        self._hash = hash(('->', operand, result))

    def __eq__(self, other):
        return (isinstance(other, ArrowType)
                and self._hash == other._hash
                and self.operand == other.operand
                and self.result == other.result)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "<ArrowType %s>" % format_type(self)


PR = GroundType()


def make_type(operands):
    """
    Build t1 -> ... -> tn -> Pr from the list [t1, ..., tn].
    """

    t = PR
    for op in reversed(list(operands)):
        t = ArrowType(op, t)
    return t


def order(t):
    return t.order


def format_type(t):
    if isinstance(t, GroundType):
        return 'Pr'
    operand = format_type(t.operand)
    if isinstance(t.operand, ArrowType):
        operand = '(' + operand + ')'
    return operand + ' -> ' + format_type(t.result)


# Node kinds
TRUE = 'tt'
FALSE = 'ff'
PROP = 'prop'
NEGPROP = 'negprop'
DIAMOND = 'diamond'
BOX = 'box'
OR = 'or'
AND = 'and'
VAR = 'var'
FIXVAR = 'fixvar'
APP = 'app'
LAMBDA = 'lambda'
MU = 'mu'
NU = 'nu'

_LITERALS = (TRUE, FALSE, PROP, NEGPROP)
_MODALS = (DIAMOND, BOX)
_BINDERS = (LAMBDA, MU, NU)
_PREFIX = _MODALS + _BINDERS
_ATOMIC = _LITERALS + (VAR, FIXVAR, APP)

_DUALS = {TRUE: FALSE, FALSE: TRUE, PROP: NEGPROP, NEGPROP: PROP,
          DIAMOND: BOX, BOX: DIAMOND, OR: AND, AND: OR, MU: NU, NU: MU}

_NODE_IDS = itertools.count(1)


class Formula(object):
    """
    A node of a formula AST shared by the HFL and APKA-body dialects.  Nodes
    are immutable once built and compare by identity; every node carries a
    process-unique identifier `nid`.  Use structurally_equal() to compare
    shapes.

    Lambda variables of an automaton body additionally carry the owning
    state and their position in that state's argument list.
    """

    __slots__ = ('kind', 'name', 'children', 'var_type', 'owner', 'index', 'nid')

    def __init__(self, kind, name=None, children=(), var_type=None, owner=None, index=None):
        self.kind = kind
        self.name = name
        self.children = tuple(children)
        self.var_type = var_type
        self.owner = owner
        self.index = index
        self.nid = next(_NODE_IDS)

    def __repr__(self):
        output = "<Formula #%i %s>" % (self.nid, format_formula(self))
        return tw_fill(output, subsequent_indent='    ')

    def __str__(self):
        return format_formula(self)

    @property
    def left(self):
        return self.children[0]

    @property
    def right(self):
        return self.children[1]

    @property
    def child(self):
        return self.children[0]

    @property
    def body(self):
        return self.children[-1]

    @property
    def is_literal(self):
        return self.kind in _LITERALS

    @property
    def is_binder(self):
        return self.kind in _BINDERS

    @property
    def is_fixpoint(self):
        return self.kind in (MU, NU)

    def walk(self):
        """
        Preorder traversal of the subformula occurrences.
        """

        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


def true():
    return Formula(TRUE)


def false():
    return Formula(FALSE)


def prop(name):
    return Formula(PROP, name=name)


def neg_prop(name):
    return Formula(NEGPROP, name=name)


def diamond(child):
    return Formula(DIAMOND, children=(child,))


def box(child):
    return Formula(BOX, children=(child,))


def disj(left, right):
    return Formula(OR, children=(left, right))


def conj(left, right):
    return Formula(AND, children=(left, right))


def lvar(name, owner=None, index=None):
    return Formula(VAR, name=name, owner=owner, index=index)


def svar(name):
    return Formula(FIXVAR, name=name)


def app(operator, operand):
    return Formula(APP, children=(operator, operand))


def lam(name, var_type, body):
    return Formula(LAMBDA, name=name, children=(body,), var_type=var_type)


def mu(name, var_type, body):
    return Formula(MU, name=name, children=(body,), var_type=var_type)


def nu(name, var_type, body):
    return Formula(NU, name=name, children=(body,), var_type=var_type)


FORMULA_GRAMMAR = r'''
?form: disj
?disj: conj
     | cconj "\\/" disj                 -> or_
?conj: prefix
     | atom "/\\" conj                  -> and_
?cconj: atom
      | atom "/\\" cconj                -> and_
?prefix: atom
       | "<>" form                      -> diamond
       | "[]" form                      -> box
       | "\\" NAME ":" type "." form    -> lam
       | "mu" NAME ":" type "." form    -> mu
       | "nu" NAME ":" type "." form    -> nu
?atom: "tt"                             -> tt
     | "ff"                             -> ff
     | NAME                             -> name
     | "!" NAME                         -> negname
     | "(" form ")"
     | "(" form form ")"                -> app

?type: tatom
     | tatom "->" type                  -> arrow
?tatom: "Pr"                            -> ground
      | "(" type ")"

NAME: /[A-Za-z_][A-Za-z0-9_']*/
COMMENT: /\/\/[^\n]*/

%import common.WS
%ignore WS
%ignore COMMENT
'''


class RawBuilder(L.Transformer):
    """
    Turn a lark parse tree into nested tuples.  Names are left unresolved
    ('name', text, line, column) until the Resolver knows the scope.
    """

    def or_(self, c):
        return ('or', c[0], c[1])

    def and_(self, c):
        return ('and', c[0], c[1])

    def diamond(self, c):
        return ('diamond', c[0])

    def box(self, c):
        return ('box', c[0])

    def lam(self, c):
        return ('lambda', str(c[0]), c[1], c[2])

    def mu(self, c):
        return ('mu', str(c[0]), c[1], c[2])

    def nu(self, c):
        return ('nu', str(c[0]), c[1], c[2])

    def tt(self, c):
        return ('tt',)

    def ff(self, c):
        return ('ff',)

    def name(self, c):
        return ('name', str(c[0]), c[0].line, c[0].column)

    def negname(self, c):
        return ('negprop', str(c[0]))

    def app(self, c):
        return ('app', c[0], c[1])

    def ground(self, c):
        return PR

    def arrow(self, c):
        return ArrowType(c[0], c[1])


def _is_lower_name(name):
    stripped = name.lstrip('_')
    return len(stripped) > 0 and stripped[0].islower()


class Resolver(object):
    """
    Convert the raw tuples from RawBuilder into Formula nodes, deciding for
    every name whether it is a lambda variable, a fixpoint/state variable or
    an atomic proposition.
    """

    def __init__(self, ctx=None, props=None, states=None, args=None, owner=None):
        self.props = None if props is None else set(props)
        self.scope = {}
        if ctx is not None:
            for name in ctx.lambdas:
                self.scope[name] = (VAR, None, None)
            for name in ctx.fixpoints:
                self.scope[name] = (FIXVAR, None, None)
        for name in (states or ()):
            self.scope[name] = (FIXVAR, None, None)
        for i,name in enumerate(args or ()):
            self.scope[name] = (VAR, owner, i)

    def resolve(self, raw):
        return self._resolve(raw, self.scope)

    def _resolve(self, raw, scope):
        tag = raw[0]
        if tag == 'tt':
            return true()
        elif tag == 'ff':
            return false()
        elif tag == 'negprop':
            return neg_prop(raw[1])
        elif tag == 'name':
            name = raw[1]
            if name in scope:
                kind, owner, index = scope[name]
                if kind == VAR:
                    return lvar(name, owner, index)
                return svar(name)
            if self.props is not None and name in self.props:
                return prop(name)
            if _is_lower_name(name):
                return lvar(name)
            if self.props is not None:
                return svar(name)
            return prop(name)
        elif tag in ('diamond', 'box'):
            child = self._resolve(raw[1], scope)
            return diamond(child) if tag == 'diamond' else box(child)
        elif tag in ('or', 'and', 'app'):
            left = self._resolve(raw[1], scope)
            right = self._resolve(raw[2], scope)
            return Formula({'or': OR, 'and': AND, 'app': APP}[tag], children=(left, right))
        elif tag in ('lambda', 'mu', 'nu'):
            name, var_type, body = raw[1], raw[2], raw[3]
            inner = dict(scope)
            inner[name] = (VAR if tag == 'lambda' else FIXVAR, None, None)
            return Formula({'lambda': LAMBDA, 'mu': MU, 'nu': NU}[tag], name=name,
                           children=(self._resolve(body, inner),), var_type=var_type)
        raise ValueError(f"unknown raw node '{tag}'")


_PARSERS = {}


def _get_parser(start):
    try:
        return _PARSERS[start]
    except KeyError:
        _PARSERS[start] = L.Lark(FORMULA_GRAMMAR, start=start, parser='lalr')
        return _PARSERS[start]


def run_parser(parser, text, builder=None):
    """
    Parse `text` with a lark parser and transform it with `builder`,
    translating lark's exceptions into ParseError.
    """

    if builder is None:
        builder = RawBuilder()
    try:
        tree = parser.parse(text)
    except L.exceptions.UnexpectedInput as e:
        line = getattr(e, 'line', None)
        column = getattr(e, 'column', None)
        message = str(e).strip().split('\n')[0]
        raise ParseError(message, line, column)
    return builder.transform(tree)


def parse_type(text):
    return run_parser(_get_parser('type'), text)


def parse(text, dialect='hfl', ctx=None, props=None, states=None, args=None, owner=None):
    """
    Parse `text` in the given dialect ('hfl', 'apka-body' or 'type').  For
    the two formula dialects the optional typing context, proposition set,
    state names and argument names steer how identifiers are resolved.
    """

    if dialect == 'type':
        return parse_type(text)
    if dialect not in ('hfl', 'apka-body'):
        raise ValueError(f"unknown dialect '{dialect}'")
    raw = run_parser(_get_parser('form'), text)
    return Resolver(ctx=ctx, props=props, states=states, args=args, owner=owner).resolve(raw)


def _wrap(f, condition):
    text = format_formula(f)
    if condition:
        text = '(' + text + ')'
    return text


def format_formula(f):
    """
    Render a formula in the concrete syntax.  The output parses back to a
    structurally equal formula.
    """

    k = f.kind
    if k == TRUE:
        return 'tt'
    elif k == FALSE:
        return 'ff'
    elif k in (PROP, VAR, FIXVAR):
        return f.name
    elif k == NEGPROP:
        return '! ' + f.name
    elif k == APP:
        op, arg = f.children
        return '(' + _wrap(op, op.kind not in _ATOMIC or op.kind == NEGPROP) + ' ' \
               + _wrap(arg, arg.kind not in _ATOMIC or arg.kind == NEGPROP) + ')'
    elif k == OR:
        l, r = f.children
        return _wrap(l, l.kind == OR or l.kind in _PREFIX) + ' \\/ ' \
               + _wrap(r, r.kind in _PREFIX)
    elif k == AND:
        l, r = f.children
        return _wrap(l, l.kind in (OR, AND) or l.kind in _PREFIX) + ' /\\ ' \
               + _wrap(r, r.kind == OR or r.kind in _PREFIX)
    elif k in _MODALS:
        c = f.child
        return ('<> ' if k == DIAMOND else '[] ') + _wrap(c, c.kind in (OR, AND))
    elif k in _BINDERS:
        keyword = {LAMBDA: '\\', MU: 'mu ', NU: 'nu '}[k]
        return keyword + f.name + ':' + format_type(f.var_type) + '. ' + format_formula(f.body)
    raise ValueError(f"unknown formula kind '{k}'")


def structurally_equal(a, b):
    """
    Compare two formulas by shape, names, binder types and lambda-variable
    positions, ignoring node identifiers.
    """

    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        if (x.kind != y.kind or x.name != y.name or x.var_type != y.var_type
            or x.owner != y.owner or x.index != y.index
            or len(x.children) != len(y.children)):
            return False
        stack.extend(zip(x.children, y.children))
    return True


def _rebuild(f, children=None, kind=None, name=None):
    return Formula(f.kind if kind is None else kind,
                   name=f.name if name is None else name,
                   children=f.children if children is None else children,
                   var_type=f.var_type, owner=f.owner, index=f.index)


def clone(f):
    """
    Deep copy with fresh node identifiers.
    """

    return _rebuild(f, children=[clone(c) for c in f.children])


def dualize(f, fixpoints=True):
    """
    Swap every operator and literal with its dual: <>/[], \\//\\, P/!P, tt/ff,
    and (when `fixpoints` is set) mu/nu.  Variables and applications are kept.
    """

    kind = _DUALS.get(f.kind, f.kind)
    if not fixpoints and f.kind in (MU, NU):
        kind = f.kind
    return _rebuild(f, children=[dualize(c, fixpoints) for c in f.children], kind=kind)


def substitute(f, fix_map=None, var_map=None):
    """
    Replace free fixpoint variables (by name, via `fix_map`) and free lambda
    variables (via `var_map`) with fresh copies of the given formulas.
    Binders shadow the names they bind.  Inputs are assumed well-named, so no
    capture can occur.
    """

    fix_map = dict(fix_map or {})
    var_map = dict(var_map or {})

    def _sub(node, fixes, lvars):
        if node.kind == FIXVAR and node.name in fixes:
            return clone(fixes[node.name])
        if node.kind == VAR and node.name in lvars:
            return clone(lvars[node.name])
        if node.kind in (MU, NU) and node.name in fixes:
            fixes = {k: v for k, v in fixes.items() if k != node.name}
        if node.kind == LAMBDA and node.name in lvars:
            lvars = {k: v for k, v in lvars.items() if k != node.name}
        if not node.children:
            return _rebuild(node)
        return _rebuild(node, children=[_sub(c, fixes, lvars) for c in node.children])

    return _sub(f, fix_map, var_map)


def free_variables(f):
    """
    Return (free lambda-variable names, free fixpoint-variable names).
    """

    free_l, free_x = set(), set()

    def _free(node, bound_l, bound_x):
        if node.kind == VAR and node.name not in bound_l:
            free_l.add(node.name)
        elif node.kind == FIXVAR and node.name not in bound_x:
            free_x.add(node.name)
        elif node.kind == LAMBDA:
            bound_l = bound_l | {node.name}
        elif node.kind in (MU, NU):
            bound_x = bound_x | {node.name}
        for c in node.children:
            _free(c, bound_l, bound_x)

    _free(f, frozenset(), frozenset())
    return free_l, free_x


def subformulas(f, proper=False):
    """
    Subformula occurrences of `f` in preorder, without `f` itself when
    `proper` is set.
    """

    nodes = list(f.walk())
    return nodes[1:] if proper else nodes


class TypingContext(object):
    """
    Types of lambda variables and of fixpoint (state) variables.
    """

    def __init__(self, lambdas=None, fixpoints=None):
        self.lambdas = dict(lambdas or {})
        self.fixpoints = dict(fixpoints or {})

    def __repr__(self):
        output = "<%s lambdas=%s, fixpoints=%s>" % (type(self).__name__,
                                                     {k: format_type(v) for k, v in self.lambdas.items()},
                                                     {k: format_type(v) for k, v in self.fixpoints.items()})
        return tw_fill(output, subsequent_indent='    ')

    def with_lambda(self, name, var_type):
        ctx = TypingContext(self.lambdas, self.fixpoints)
        ctx.lambdas[name] = var_type
        return ctx

    def with_fixpoint(self, name, var_type):
        ctx = TypingContext(self.lambdas, self.fixpoints)
        ctx.fixpoints[name] = var_type
        return ctx


def typecheck(ctx, f, dialect='hfl', annotate=None):
    """
    Derive the type of `f` under `ctx`.  When `annotate` is a dictionary it
    receives the type of every subformula occurrence, keyed by node id.
    """

    if ctx is None:
        ctx = TypingContext()

    def _check(node, ctx):
        k = node.kind
        if k in _LITERALS:
            t = PR
        elif k in _MODALS:
            t = _expect_ground(node.child, ctx, node)
        elif k in (OR, AND):
            _expect_ground(node.left, ctx, node)
            t = _expect_ground(node.right, ctx, node)
        elif k == VAR:
            try:
                t = ctx.lambdas[node.name]
            except KeyError:
                raise UnboundVariable(f"unbound lambda variable '{node.name}'")
        elif k == FIXVAR:
            try:
                t = ctx.fixpoints[node.name]
            except KeyError:
                raise UnboundVariable(f"unbound fixpoint variable '{node.name}'")
        elif k == APP:
            op_t = _check(node.left, ctx)
            arg_t = _check(node.right, ctx)
            if not isinstance(op_t, ArrowType):
                raise TypeMismatch("operator '%s' has type %s, which is not a function type" % (format_formula(node.left), format_type(op_t)))
            if op_t.operand != arg_t:
                raise TypeMismatch("operator '%s' expects %s but operand '%s' has type %s" % (format_formula(node.left), format_type(op_t.operand),
                                                                                                format_formula(node.right), format_type(arg_t)))
            t = op_t.result
        elif k in _BINDERS:
            if dialect == 'apka-body':
                raise DialectViolation(f"'{k}' binders are not allowed in automaton bodies")
            if k == LAMBDA:
                body_t = _check(node.body, ctx.with_lambda(node.name, node.var_type))
                t = ArrowType(node.var_type, body_t)
            else:
                body_t = _check(node.body, ctx.with_fixpoint(node.name, node.var_type))
                if body_t != node.var_type:
                    raise TypeMismatch("fixpoint %s is declared %s but its body has type %s" % (node.name, format_type(node.var_type), format_type(body_t)))
                t = node.var_type
        else:
            raise ValueError(f"unknown formula kind '{k}'")
        if annotate is not None:
            annotate[node.nid] = t
        return t

    def _expect_ground(child, ctx, parent):
        t = _check(child, ctx)
        if t != PR:
            raise TypeMismatch("'%s' has type %s where Pr is required" % (format_formula(child), format_type(t)))
        return t

    return _check(f, ctx)


def formula_order(f, ctx=None, dialect='hfl'):
    """
    Order of a formula: the maximum order over the types of its subformulas.
    """

    types = {}
    typecheck(ctx, f, dialect=dialect, annotate=types)
    return max([t.order for t in types.values()])


class BindingReport(object):
    """
    Binding structure of an HFL formula: whether it is well-named, its free
    variables, the defining subformula of each fixpoint variable and the
    "outermore" relation between fixpoint variables.
    """

    def __init__(self, well_named, free_lambda, free_fixpoints, definitions, below):
        self.well_named = well_named
        self.free_lambda = frozenset(free_lambda)
        self.free_fixpoints = frozenset(free_fixpoints)
        self.definitions = dict(definitions)
        self._below = frozenset(below)

    def __repr__(self):
        output = "<%s well_named=%s, free_lambda=%s, free_fixpoints=%s, fixpoints=%s>" % (type(self).__name__,
                                                                                         self.well_named,
                                                                                         sorted(self.free_lambda),
                                                                                         sorted(self.free_fixpoints),
                                                                                         list(self.definitions.keys()))
        return tw_fill(output, subsequent_indent='    ')

    @property
    def closed(self):
        return not self.free_lambda and not self.free_fixpoints

    def fp(self, name):
        """
        The subformula that binds fixpoint variable `name`.
        """

        return self.definitions[name]

    def outermore(self, x, y):
        """
        Whether fixpoint variable `x` lies strictly outside `y`, i.e. x is
        reachable from y under "appears free in the definition of".
        """

        return (y, x) in self._below

    def outermost(self, names=None):
        """
        The fixpoint variables among `names` (default: all) that no other
        variable among them is outermore than.
        """

        if names is None:
            names = list(self.definitions.keys())
        return [x for x in names
                if not any(self.outermore(y, x) for y in names if y != x)]


def analyze_binding(f):
    binders = {}
    definitions = {}
    for node in f.walk():
        if node.is_binder:
            binders[node.name] = binders.get(node.name, 0) + 1
            if node.is_fixpoint:
                definitions.setdefault(node.name, node)
    well_named = all(count == 1 for count in binders.values())
    free_l, free_x = free_variables(f)

    # X below Y when Y appears free in fp(X); then close transitively
    below = set()
    for name, node in definitions.items():
        _, inner_free = free_variables(node)
        for other in inner_free:
            if other in definitions and other != name:
                below.add((name, other))
    changed = True
    while changed:
        changed = False
        for (a, b) in list(below):
            for (c, d) in list(below):
                if b == c and a != d and (a, d) not in below:
                    below.add((a, d))
                    changed = True

    return BindingReport(well_named, free_l, free_x, definitions, below)
