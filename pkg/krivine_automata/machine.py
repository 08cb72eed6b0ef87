import logging
from collections import deque
from textwrap import fill as tw_fill

from krivine_automata.syntax import *
from krivine_automata.apka import validate

__all__ = ['GameError', 'CHOICES', 'Environment', 'EnvArena', 'Closure',
           'PriorityEntry', 'Stack', 'EMPTY_STACK', 'Configuration', 'GameState',
           'StepOutcome', 'Deterministic', 'ExistsChoice', 'ForallChoice',
           'ExistsWins', 'ForallWins', 'Option', 'TraceEntry', 'Trace',
           'init_run', 'pending', 'step', 'legal_choices', 'run_strategy',
           'run_script', 'format_digits', 'format_trace',
           'UNFOLD', 'PUSH', 'DEREF', 'RETURN', 'DEREF_GROUND', 'BRANCH', 'MOVE']


machine_logger = logging.getLogger('__main__')

CHOICES = ('L', 'R')

# Transition rules, as recorded in traces
UNFOLD = 'unfold'
PUSH = 'push'
DEREF = 'deref'
RETURN = 'return'
DEREF_GROUND = 'deref-ground'
BRANCH = 'branch'
MOVE = 'move'


class GameError(RuntimeError):
    pass


class Environment(object):
    """
    An environment: the closures bound to the lambda variables of the state
    that created it, plus a parent link.  The empty environment e0 has no
    creator and no parent.
    """

    __slots__ = ('id', 'parent', 'creator', 'creation_step', 'bindings', 'level')

    def __init__(self, id, parent, creator, creation_step, bindings):
        self.id = id
        self.parent = parent
        self.creator = creator
        self.creation_step = creation_step
        self.bindings = tuple(bindings)
        self.level = 0 if parent is None else parent.level + 1

    def __repr__(self):
        return "<%s e%i creator=%s parent=%s>" % (type(self).__name__,
                                                  self.id,
                                                  self.creator,
                                                  None if self.parent is None else 'e%i' % self.parent.id)

    def __str__(self):
        return 'e%i' % self.id

    def is_predecessor_of(self, other):
        """
        Whether this environment lies strictly above `other` on its parent
        chain.
        """

        if self.level >= other.level:
            return False
        e = other
        while e.level > self.level:
            e = e.parent
        return e is self

    def chain(self):
        """
        This environment followed by all of its predecessors.
        """

        e = self
        while e is not None:
            yield e
            e = e.parent


class EnvArena(object):
    """
    Append-only store of every environment created during a run, together
    with the step at which each one was closed.
    """

    def __init__(self):
        self.environments = [Environment(0, None, None, 0, ())]
        self.closed_at = {}

    def __repr__(self):
        output = "<%s size=%i, closed=%i>" % (type(self).__name__,
                                              len(self.environments),
                                              len(self.closed_at))
        return tw_fill(output, subsequent_indent='    ')

    def __len__(self):
        return len(self.environments)

    def __getitem__(self, idx):
        return self.environments[idx]

    @property
    def empty(self):
        return self.environments[0]

    def create(self, parent, creator, step, bindings):
        env = Environment(len(self.environments), parent, creator, step, bindings)
        self.environments.append(env)
        return env

    def close(self, env, step):
        if env.id in self.closed_at:
            raise GameError(f"environment e{env.id} is already closed")
        self.closed_at[env.id] = step

    def is_closed(self, env):
        return env.id in self.closed_at

    def copy(self):
        arena = EnvArena.__new__(EnvArena)
        arena.environments = list(self.environments)
        arena.closed_at = dict(self.closed_at)
        return arena


class Closure(object):
    __slots__ = ('formula', 'env')

    def __init__(self, formula, env):
        self.formula = formula
        self.env = env

    def __repr__(self):
        return "(%s, %s)" % (format_formula(self.formula), self.env)


class PriorityEntry(object):
    """
    A priority on the priority stack together with the environment it is
    tied to.
    """

    __slots__ = ('priority', 'owner')

    def __init__(self, priority, owner):
        self.priority = priority
        self.owner = owner

    def __repr__(self):
        return "%i@%s" % (self.priority, self.owner)


class Stack(object):
    """
    Persistent stack of cons cells; pushing and popping share structure, so
    every configuration of a trace can keep its own stacks.
    """

    __slots__ = ('top', 'below', 'size')

    def __init__(self, top, below, size):
        self.top = top
        self.below = below
        self.size = size

    def __len__(self):
        return self.size

    def __repr__(self):
        return "<%s %s>" % (type(self).__name__, self.to_list())

    def push(self, value):
        return Stack(value, self, self.size+1)

    def pop(self):
        if self.size == 0:
            raise GameError("pop from an empty stack")
        return self.below

    def to_list(self):
        """
        Entries from bottom to top.
        """

        out = []
        cell = self
        while cell.size > 0:
            out.append(cell.top)
            cell = cell.below
        out.reverse()
        return out

    def without(self, index):
        """
        A copy with the entry at position `index` (from the bottom) removed.
        """

        items = self.to_list()
        del items[index]
        return Stack.from_list(items)

    @staticmethod
    def from_list(items):
        s = EMPTY_STACK
        for item in items:
            s = s.push(item)
        return s


EMPTY_STACK = Stack(None, None, 0)


class Configuration(object):
    """
    One configuration (t, (Q, e), e', G, D) of the acceptance game.  `depth`
    is the level of `node` in the input tree.
    """

    __slots__ = ('node', 'depth', 'current', 'computing', 'args', 'prios')

    def __init__(self, node, depth, current, computing, args, prios):
        self.node = node
        self.depth = depth
        self.current = current
        self.computing = computing
        self.args = args
        self.prios = prios

    def __repr__(self):
        output = "<%s node=%s, current=%r, computing=%s, |G|=%i, D=%s>" % (type(self).__name__,
                                                                          self.node,
                                                                          self.current,
                                                                          self.computing,
                                                                          len(self.args),
                                                                          format_digits(self.priorities))
        return tw_fill(output, subsequent_indent='    ')

    def replace(self, **kwds):
        values = {name: getattr(self, name) for name in self.__slots__}
        values.update(kwds)
        return Configuration(**values)

    @property
    def priorities(self):
        return [entry.priority for entry in self.prios.to_list()]

    @property
    def formula(self):
        return self.current.formula


class Option(object):
    """
    One of the two moves at a choice point.
    """

    def __init__(self, choice, formula, node):
        self.choice = choice
        self.formula = formula
        self.node = node

    def __repr__(self):
        return "%s: %s @ %s" % (self.choice, format_formula(self.formula), self.node)


class StepOutcome(object):
    terminal = False
    player = None

    def __repr__(self):
        return "<%s>" % type(self).__name__


class Deterministic(StepOutcome):
    def __init__(self, state):
        self.state = state


class _Choice(StepOutcome):
    def __init__(self, options):
        if len(options) != 2:
            raise GameError("choice points have exactly two options")
        self.options = list(options)

    def __repr__(self):
        return "<%s %s>" % (type(self).__name__, self.options)


class ExistsChoice(_Choice):
    player = 'exists'


class ForallChoice(_Choice):
    player = 'forall'


class _Win(StepOutcome):
    terminal = True

    def __init__(self, reason):
        self.reason = reason

    def __repr__(self):
        return "<%s %s>" % (type(self).__name__, self.reason)


class ExistsWins(_Win):
    player = 'exists'


class ForallWins(_Win):
    player = 'forall'


class TraceEntry(object):
    """
    A configuration together with the rule that produced it.  `created` is
    the environment made by an unfolding step and `closed` the one left by a
    return step.
    """

    __slots__ = ('step', 'config', 'rule', 'choice', 'created', 'closed')

    def __init__(self, step, config, rule=None, choice=None, created=None, closed=None):
        self.step = step
        self.config = config
        self.rule = rule
        self.choice = choice
        self.created = created
        self.closed = closed

    def __repr__(self):
        return "<%s step%i %s %r>" % (type(self).__name__, self.step, self.rule, self.config)


class GameState(object):
    """
    A run in progress: the automaton, the input tree, the current
    configuration, the environment arena and the step counter.  A GameState
    has a single owner; use fork() for an independent copy.

    With `record` set every configuration is kept in `history`; a positive
    `trace_limit` keeps only the most recent ones.
    """

    def __init__(self, apka, tree, config, arena, step=0, record=True, trace_limit=None):
        self.apka = apka
        self.tree = tree
        self.config = config
        self.arena = arena
        self.step = step
        self.finished = None
        self.record = record
        self.history = deque([], maxlen=trace_limit) if record else None

    def __repr__(self):
        output = "<%s step=%i, %r>" % (type(self).__name__, self.step, self.config)
        return tw_fill(output, subsequent_indent='    ')

    def fork(self):
        s = GameState.__new__(GameState)
        s.apka = self.apka
        s.tree = self.tree
        s.config = self.config
        s.arena = self.arena.copy()
        s.step = self.step
        s.finished = self.finished
        s.record = self.record
        s.history = None if self.history is None else deque(self.history, maxlen=self.history.maxlen)
        return s

    def _log(self, entry):
        if self.record:
            self.history.append(entry)


def init_run(a, t, start=None, record=True, trace_limit=None, check=True):
    """
    Build the initial configuration (t0, (X_init, e0), e0, eps, eps).
    """

    if check:
        report = validate(a)
        if not report.ok:
            raise GameError("invalid automaton: %s" % '; '.join(report.violations))
    if start is None:
        start = t.root
    elif hasattr(t, 'tree_states') and start not in t.tree_states:
        raise GameError(f"'{start}' is not a tree-state")

    arena = EnvArena()
    config = Configuration(start, 0, Closure(a.state_nodes[a.init], arena.empty),
                           arena.empty, EMPTY_STACK, EMPTY_STACK)
    s = GameState(a, t, config, arena, record=record, trace_limit=trace_limit)
    s._log(TraceEntry(0, config))
    return s


def _binding(a, q, env):
    index = q.index
    if index is None:
        names = [name for name, _ in a.lambda_sig[env.creator]]
        index = names.index(q.name)
    return env.bindings[index]


def _literal_holds(t, node, q):
    k = q.kind
    if k == TRUE:
        return True
    elif k == FALSE:
        return False
    holds = q.name in t.label_set(node)
    return holds if k == PROP else not holds


def _options(s):
    cfg = s.config
    q = cfg.formula
    if q.kind in (OR, AND):
        return [Option('L', q.left, cfg.node), Option('R', q.right, cfg.node)]
    return [Option(c, q.child, s.tree.successor(cfg.node, side)) for side, c in enumerate(CHOICES)]


def pending(s):
    """
    What the current configuration demands: a choice by one of the players,
    a deterministic step, or (at a literal) the winner.
    """

    q = s.config.formula
    k = q.kind
    if q.is_literal:
        holds = _literal_holds(s.tree, s.config.node, q)
        reason = "%s %s at %s" % (format_formula(q), 'holds' if holds else 'fails', s.config.node)
        return ExistsWins(reason) if holds else ForallWins(reason)
    elif k in (OR, DIAMOND):
        return ExistsChoice(_options(s))
    elif k in (AND, BOX):
        return ForallChoice(_options(s))
    return Deterministic(s)


def step(s, choice=None):
    """
    Apply one transition rule.  Returns Deterministic(s) once the state has
    moved on, the winner when the current formula is a literal, and the
    pending ExistsChoice/ForallChoice when a choice point is stepped without
    a choice.
    """

    if s.finished is not None:
        raise GameError("the game is already decided")

    a = s.apka
    cfg = s.config
    q, e = cfg.current.formula, cfg.current.env
    k = q.kind
    created = closed = None

    if q.is_literal:
        if choice is not None:
            raise GameError("superfluous choice at a literal")
        outcome = pending(s)
        s.finished = outcome
        return outcome

    if k in (OR, AND, DIAMOND, BOX):
        if choice is None:
            return pending(s)
        if choice not in CHOICES:
            raise GameError(f"invalid choice '{choice}'")
        side = CHOICES.index(choice)
        if k in (OR, AND):
            nxt = cfg.replace(current=Closure(q.children[side], e))
            rule = BRANCH
        else:
            nxt = cfg.replace(node=s.tree.successor(cfg.node, side), depth=cfg.depth+1,
                              current=Closure(q.child, e))
            rule = MOVE
    else:
        if choice is not None:
            raise GameError("superfluous choice at a deterministic configuration")
        if k == FIXVAR:
            x = q.name
            # The first declared argument is on top of the stack
            args = list(reversed(cfg.args.to_list()))
            if len(args) != a.arity(x):
                raise GameError("state %s expects %i arguments but the stack holds %i" % (x, a.arity(x), len(args)))
            created = s.arena.create(cfg.computing, x, s.step+1, args)
            nxt = Configuration(cfg.node, cfg.depth, Closure(a.delta[x], created), created,
                                EMPTY_STACK, cfg.prios.push(PriorityEntry(a.priority[x], created)))
            rule = UNFOLD
        elif k == APP:
            nxt = cfg.replace(current=Closure(q.left, e), args=cfg.args.push(Closure(q.right, e)))
            rule = PUSH
        elif k == VAR:
            bound = _binding(a, q, e)
            if a.type_of(q) != PR:
                nxt = cfg.replace(current=bound)
                rule = DEREF
            elif bound.env is not cfg.computing:
                closed = cfg.computing
                if closed.parent is None:
                    raise GameError("cannot leave the empty environment")
                if len(cfg.prios) == 0 or cfg.prios.top.owner is not closed:
                    raise GameError(f"priority stack is out of step with {closed}")
                s.arena.close(closed, s.step+1)
                nxt = cfg.replace(computing=closed.parent, prios=cfg.prios.pop())
                rule = RETURN
            else:
                nxt = cfg.replace(current=bound)
                rule = DEREF_GROUND
        else:
            raise GameError(f"'{k}' nodes cannot occur in automaton bodies")

    s.step += 1
    s.config = nxt
    s._log(TraceEntry(s.step, nxt, rule, choice, created, closed))
    return Deterministic(s)


def _local_value(t, node, q):
    """
    Three-valued look-ahead: the truth of `q` at `node` when it is decided by
    literals alone, None otherwise.
    """

    if q.is_literal:
        return _literal_holds(t, node, q)
    if q.kind in (OR, AND):
        l = _local_value(t, node, q.left)
        r = _local_value(t, node, q.right)
        if q.kind == OR:
            if l is True or r is True:
                return True
            if l is False and r is False:
                return False
        else:
            if l is False or r is False:
                return False
            if l is True and r is True:
                return True
    return None


def legal_choices(s):
    """
    The choices at the current choice point that do not lose on the spot
    for the player making them.  Choices that win on the spot take
    precedence; when every option loses, all are returned.
    """

    outcome = pending(s)
    if not isinstance(outcome, (ExistsChoice, ForallChoice)):
        return []
    winning = outcome.player == 'exists'
    values = [(opt.choice, _local_value(s.tree, opt.node, opt.formula)) for opt in outcome.options]
    for accepted in ((winning,), (winning, None)):
        good = [choice for choice, value in values if value in accepted]
        if good:
            return good
    return [choice for choice, _ in values]


class Trace(object):
    """
    The recorded part of a run: its entries, how it ended (ExistsWins,
    ForallWins, NeedsChoice or MaxSteps), the arena and, for runs without a
    terminal verdict, a stair summary.
    """

    def __init__(self, apka, tree, entries, status, reason=None, arena=None, summary=None):
        self.apka = apka
        self.tree = tree
        self.entries = list(entries)
        self.status = status
        self.reason = reason
        self.arena = arena
        self.summary = summary

    def __repr__(self):
        output = "<%s steps=%i, status=%s>" % (type(self).__name__, len(self.entries), self.status)
        return tw_fill(output, subsequent_indent='    ')

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, idx):
        return self.entries[idx]

    @property
    def configs(self):
        return [entry.config for entry in self.entries]

    @property
    def decided(self):
        return self.status in ('ExistsWins', 'ForallWins')

    def projection(self):
        """
        Environment-naming independent view of every configuration: (tree
        level, formula text, stack size, priority stack).
        """

        return [(c.depth, format_formula(c.formula), len(c.args), tuple(c.priorities))
                for c in self.configs]


def run_strategy(s, queue, max_steps=10000, summary_from=0, log=None):
    """
    Drive a run: deterministic steps are taken automatically and every
    choice point asks `queue` for a choice, whichever player owns it.  The
    trace holds at most `max_steps` configurations.
    """

    if log is None:
        log = machine_logger
    if not s.record:
        raise GameError("run_strategy needs a recording GameState")

    status, reason = None, None
    while status is None:
        if len(s.history) >= max_steps:
            status = 'MaxSteps'
            break
        outcome = pending(s)
        if outcome.terminal:
            step(s)
            status = type(outcome).__name__
            reason = outcome.reason
        elif isinstance(outcome, (ExistsChoice, ForallChoice)):
            choice = queue.choose(s, outcome)
            if choice is None:
                status = 'NeedsChoice'
                reason = "%s to choose at step %i" % (outcome.player, s.step)
                break
            step(s, choice)
        else:
            step(s)
    log.debug("Run stopped after %i steps: %s", s.step, status)

    trace = Trace(s.apka, s.tree, s.history, status, reason=reason, arena=s.arena.copy())
    if not trace.decided:
        from krivine_automata.monitoring import stair_summary
        trace.summary = stair_summary(trace, min(summary_from, max(len(trace)-1, 0)))
    return trace


def run_script(s, script, max_steps=10000, summary_from=0):
    """
    Play `script` (a sequence of 'L'/'R' tokens, or script text) one token
    per choice point.
    """

    from krivine_automata.operations import ScriptQueue
    if isinstance(script, str):
        queue = ScriptQueue.from_text(script)
    else:
        queue = ScriptQueue(script)
    return run_strategy(s, queue, max_steps=max_steps, summary_from=summary_from)


def format_digits(priorities):
    """
    Priorities from bottom to top as digits; values above 9 print as [p].
    """

    if len(priorities) == 0:
        return 'ε'
    return ''.join([str(p) if p < 10 else '[%i]' % p for p in priorities])


def format_trace(trace, show_formulas=False):
    """
    Render a trace in the line-per-step dump format.
    """

    from krivine_automata.filewriter import render_template

    a = trace.apka
    formulas = []
    if show_formulas:
        formulas = [{'index': i, 'text': format_formula(f)} for i, f in enumerate(a.formulas)]
    entries = []
    for entry in trace.entries:
        c = entry.config
        entries.append({'step': entry.step,
                        'node': c.node,
                        'depth': c.depth,
                        'q': a.index_of(c.formula),
                        'env': c.current.env,
                        'comp': c.computing,
                        'args': len(c.args),
                        'digits': format_digits(c.priorities)})
    return render_template('trace.j2', formulas=formulas, entries=entries,
                           status=trace.status, reason=trace.reason)
