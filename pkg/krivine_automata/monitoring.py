import logging
from collections import Counter
from textwrap import fill as tw_fill

from krivine_automata.syntax import *
from krivine_automata.machine import UNFOLD, RETURN, DEREF_GROUND

__all__ = ['NotHardAutomaton', 'MonitorReport', 'check_run_invariants',
           'StairSummary', 'stair_summary', 'HardLayout', 'hard_layout',
           'RoundRecord', 'ConformanceReport', 'round_analysis']


monitoring_logger = logging.getLogger('__main__')


class NotHardAutomaton(ValueError):
    pass


def _combine_status(summary, info, new_summary, new_info):
    """
    Combine an old summary/info pair with a new one, respecting the order
    normal < warning < error.  Infos of equal severity are joined.
    """

    if new_summary == 'error':
        if summary != 'error':
            info = ''
        if len(info):
            info += ', '
        summary = 'error'
        info += new_info

    elif new_summary == 'warning':
        if summary == 'normal':
            info = ''
            summary = 'warning'
        if summary == 'warning':
            if len(info):
                info += ', '
            info += new_info

    return summary, info


class _ReportBase(object):
    """
    A list of (step, check, message) violations with a normal/warning/error
    summary.
    """

    _title = 'Report'

    def __init__(self):
        self.violations = []
        self.warnings = []
        self.summary = 'normal'
        self.info = ''

    def __repr__(self):
        output = "<%s summary=%s, violations=%i>" % (type(self).__name__,
                                                      self.summary,
                                                      len(self.violations))
        return tw_fill(output, subsequent_indent='    ')

    def __len__(self):
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)

    @property
    def ok(self):
        return len(self.violations) == 0

    def add(self, step, check, message):
        self.violations.append((step, check, message))
        self.summary, self.info = _combine_status(self.summary, self.info,
                                                  'error', f"{check} at step {step}")

    def warn(self, message):
        self.warnings.append(message)
        self.summary, self.info = _combine_status(self.summary, self.info, 'warning', message)

    def by_check(self):
        return Counter([check for _, check, _ in self.violations])

    def format(self):
        lines = ["step%i [%s] %s" % v for v in self.violations]
        lines.extend(["warning: %s" % w for w in self.warnings])
        return '\n'.join(lines)

    def log_report(self, log=None):
        if log is None:
            log = monitoring_logger
        log.debug("=== %s ===", self._title)
        log.debug(" summary: %s", self.summary)
        log.debug(" info: %s", self.info)
        log.debug(" violations: %i", len(self.violations))
        for check, count in sorted(self.by_check().items()):
            log.debug(" %s: %i", check, count)
        log.debug("===   ===")


class MonitorReport(_ReportBase):
    _title = 'Monitor Report'


def _prios_match(cell, env, verified):
    """
    Whether the priority stack `cell` is exactly the priorities tied to `env`
    and its predecessors.  Pairs already verified are not walked again.
    """

    pending = []
    ok = True
    while True:
        key = (id(cell), env.id)
        if key in verified:
            break
        if cell.size == 0:
            ok = env.parent is None
            break
        if env.parent is None or cell.top.owner is not env:
            ok = False
            break
        pending.append(key)
        cell, env = cell.below, env.parent
    if ok:
        verified.update(pending)
    return ok


def check_run_invariants(trace, limit=1000):
    """
    Check every recorded configuration of a run against the environment and
    stack invariants of the machine:

     * env-1: the current closure's environment is the computing environment
       or one of its predecessors (return steps are in transit and exempt)
     * env-2: a new environment only binds closures over its predecessors
     * env-3: closures on the stack live in the current environment or its
       predecessors
     * env-4: the priority stack is the priorities tied to the computing
       environment and its predecessors
     * stack-typing, type-order, owner, return-target, return-count,
       occurrence and close bookkeeping

    Monitors never raise; at most `limit` violations are collected.
    """

    report = MonitorReport()
    a = trace.apka
    arena = trace.arena
    verified = set()
    anchors = {}
    returns = Counter()
    closed = set()
    created_steps = {}

    def _add(step, check, message):
        if len(report) < limit:
            report.add(step, check, message)

    prev = None
    for entry in trace.entries:
        c = entry.config
        s = entry.step
        q, e = c.current.formula, c.current.env
        comp = c.computing

        # env-1
        if entry.rule != RETURN:
            if e is not comp and not e.is_predecessor_of(comp):
                _add(s, 'env-1', f"closure environment {e} is not {comp} or a predecessor")

        # env-2
        if entry.rule == UNFOLD:
            new = entry.created
            if new is None or new is not comp:
                _add(s, 'env-2', "unfolding did not make the new environment computing")
            else:
                if prev is not None and new.parent is not prev.config.computing:
                    _add(s, 'env-2', f"{new} does not extend the previous computing environment")
                for b in new.bindings:
                    if not b.env.is_predecessor_of(new):
                        _add(s, 'env-2', f"{new} binds a closure over {b.env}, which is not a predecessor")
                if new.creation_step != s:
                    _add(s, 'occurrence', f"{new} records creation step {new.creation_step}")
                created_steps[new.id] = s

        # env-3
        for cl in c.args.to_list():
            if cl.env is not e and not cl.env.is_predecessor_of(e):
                _add(s, 'env-3', f"stack closure over {cl.env} is not below {e}")

        # env-4
        if not _prios_match(c.prios, comp, verified):
            _add(s, 'env-4', "priority stack %s does not match the chain of %s" % (c.priorities, comp))
        elif len(c.prios) and c.prios.top.priority != a.priority.get(comp.creator):
            _add(s, 'env-4', f"top priority does not belong to the creator of {comp}")

        # Stack typing
        t = a.type_of(q)
        stack_types = [a.type_of(cl.formula) for cl in reversed(c.args.to_list())]
        if t is None or t.operands != stack_types:
            _add(s, 'stack-typing', "closure of type %s with stack types [%s]" % (t, ', '.join([str(st) for st in stack_types])))

        # Closure owners
        for cl in [c.current] + c.args.to_list():
            owner = a.owner_of(cl.formula)
            if owner is not None and cl.env.creator != owner:
                _add(s, 'owner', "closure of a %s subformula over %s (created by %s)" % (owner, cl.env, cl.env.creator))

        if prev is not None:
            pc = prev.config

            # Type order within one computing environment
            if pc.computing is comp and t is not None:
                pt = a.type_of(pc.formula)
                if pt is not None and t.order < pt.order:
                    _add(s, 'type-order', "order dropped from %i to %i" % (pt.order, t.order))

            # Pop/close bookkeeping
            if entry.rule == RETURN:
                if entry.closed is not pc.computing or comp is not pc.computing.parent:
                    _add(s, 'close', "return did not move to the parent environment")
                if len(c.prios) != len(pc.prios) - 1:
                    _add(s, 'close', "return did not pop exactly one priority")
                if entry.closed is not None:
                    if arena.closed_at.get(entry.closed.id) != s:
                        _add(s, 'close', f"{entry.closed} is not recorded as closed at this step")
                    closed.add(entry.closed.id)
            else:
                if entry.closed is not None:
                    _add(s, 'close', "an environment was closed outside a return")
                expected = len(pc.prios) + (1 if entry.rule == UNFOLD else 0)
                if len(c.prios) != expected:
                    _add(s, 'close', "priority stack changed outside an unfold or return")

            # Returns land inside the closure last computed in that environment
            if entry.rule == DEREF_GROUND:
                if prev.rule != RETURN:
                    _add(s, 'return-target', "ground dereference in the computing environment without a return")
                anchor = anchors.get(comp.id)
                if anchor is not None:
                    if t != PR or not a.is_proper_subformula(q, anchor):
                        _add(s, 'return-target', "return to %s lands on %s, outside %s" % (comp, format_formula(q), format_formula(anchor)))
                returns[comp.id] += 1
                if comp.creator is not None and returns[comp.id] > a.body_size(comp.creator):
                    _add(s, 'return-count', f"{comp} was returned to {returns[comp.id]} times")

        if comp.id in closed:
            _add(s, 'close', f"closed environment {comp} is computing again")

        if t == PR and e is comp:
            anchors[comp.id] = q
        prev = entry

    # Environment <-> occurrence bijection over the trace window
    if trace.entries and arena is not None:
        first, last = trace.entries[0].step, trace.entries[-1].step
        for env in arena.environments[1:]:
            if first < env.creation_step <= last and created_steps.get(env.id) != env.creation_step:
                _add(env.creation_step, 'occurrence', f"{env} was not created by an unfolding step")
        for env_id, step in arena.closed_at.items():
            if first < step <= last and env_id not in closed:
                _add(step, 'close', f"e{env_id} was closed outside a return step")

    return report


class StairSummary(object):
    """
    Finite-window view of the stair parity condition.  The stable prefix is
    the part of the priority stack left untouched over the window, the
    never-popped priorities were pushed in the window and survive to its end,
    and the candidate is the largest of them.  This is a heuristic about
    the suffix of a finite trace, not a verdict on the infinite play.
    """

    heuristic = True

    def __init__(self, start, end, stable_prefix, never_popped, pushes, pops, decided=None):
        self.start = start
        self.end = end
        self.stable_prefix = list(stable_prefix)
        self.never_popped = list(never_popped)
        self.pushes = dict(pushes)
        self.pops = dict(pops)
        self.decided = decided

    def __repr__(self):
        output = "<%s window=[%i, %i], stable_prefix=%s, candidate=%s>" % (type(self).__name__,
                                                                           self.start,
                                                                           self.end,
                                                                           self.stable_prefix,
                                                                           self.candidate)
        return tw_fill(output, subsequent_indent='    ')

    @property
    def candidate(self):
        if not self.never_popped:
            return None
        return max(self.never_popped)

    @property
    def leaning(self):
        """
        Which player the candidate favours: 'exists' for an even candidate.
        """

        if self.candidate is None:
            return None
        return 'exists' if self.candidate % 2 == 0 else 'forall'

    def format(self):
        lines = ["// stair summary over steps %i..%i (finite-window heuristic)" % (self.start, self.end)]
        if self.decided is not None:
            lines.append(f"// already decided: {self.decided}")
        lines.append("// stable prefix: %s" % ''.join([str(p) for p in self.stable_prefix]))
        lines.append("// never popped: %s" % ' '.join([str(p) for p in self.never_popped]))
        lines.append("// candidate: %s" % self.candidate)
        for p in sorted(set(self.pushes) | set(self.pops)):
            lines.append("// priority %i: %i pushes, %i pops" % (p, self.pushes.get(p, 0), self.pops.get(p, 0)))
        return '\n'.join(lines)

    def log_report(self, log=None):
        if log is None:
            log = monitoring_logger
        log.debug("=== Stair Summary ===")
        log.debug(" window: %i to %i", self.start, self.end)
        log.debug(" stable prefix: %s", self.stable_prefix)
        log.debug(" never popped: %s", self.never_popped)
        log.debug(" candidate: %s", self.candidate)
        log.debug("===   ===")


def stair_summary(trace, suffix_start=0):
    """
    Summarize the priority stack over the entries from `suffix_start` (an
    index into the trace) to the end.
    """

    if suffix_start < 0 or suffix_start > len(trace.entries):
        raise ValueError("suffix start is outside the trace")
    window = trace.entries[suffix_start:]
    decided = trace.status if trace.decided else None
    if not window:
        return StairSummary(suffix_start, suffix_start, [], [], {}, {}, decided=decided)

    start_step = window[0].step
    h_min = min([len(entry.config.prios) for entry in window])
    final = window[-1].config.prios.to_list()
    stable = [entry.priority for entry in final[:h_min]]
    never_popped = [entry.priority for entry in final
                    if entry.owner.creation_step > start_step]

    pushes, pops = Counter(), Counter()
    for prev, entry in zip(window[:-1], window[1:]):
        if entry.rule == UNFOLD:
            pushes[entry.config.prios.top.priority] += 1
        elif entry.rule == RETURN:
            pops[prev.config.prios.top.priority] += 1

    return StairSummary(start_step, window[-1].step, stable, never_popped, pushes, pops, decided=decided)


class HardLayout(object):
    """
    Where the pieces of a hard automaton sit: its size and flavor, and the
    label of the implication each right-hand side belongs to.
    """

    def __init__(self, n, flavor, targets, base):
        self.n = n
        self.flavor = flavor
        self.targets = dict(targets)
        self.base = base

    def __repr__(self):
        output = "<%s n=%i, flavor=%s>" % (type(self).__name__, self.n, self.flavor)
        return tw_fill(output, subsequent_indent='    ')

    def state_for_label(self, label):
        """
        The X state entered by the implication for label F_j.
        """

        j = int(label.split('_', 1)[1])
        return 'X_%i' % (j - self.base)

    def p_sequence(self, kind, k=None):
        if kind == 'F':
            return [self.base] + [j + self.base for j in range(k, -1, -1)]
        return [self.base]


def _split(f, kind):
    parts = []
    while f.kind == kind:
        parts.append(f.left)
        f = f.right
    parts.append(f)
    return parts


def hard_layout(a):
    """
    Recognize an automaton built by hierarchy.gen_hard.
    """

    xs = [x for x in a.states if x.startswith('X_')]
    n = len(xs)
    if n < 1 or a.init != 'I' or 'O' not in a.states or set(a.states) != {'I', 'O'} | set(xs):
        raise NotHardAutomaton("states are not I, O, X_0..X_{n-1}")
    if a.priority['I'] not in (0, 1):
        raise NotHardAutomaton("initial priority is neither 0 nor 1")
    base = a.priority['I']
    flavor = 'Sigma' if base == 0 else 'Pi'
    for i in range(n):
        if a.priority.get('X_%i' % i) != i + base:
            raise NotHardAutomaton(f"X_{i} has the wrong priority")

    body = a.delta['O']
    try:
        if body.kind != AND or body.left.kind != NEGPROP or body.left.name != 'F':
            raise ValueError
        rest = body.right
        if rest.kind != OR or rest.left.kind != PROP or rest.left.name != 'T':
            raise ValueError
        targets = {}
        for imp in _split(rest.right, AND):
            if imp.kind != OR or imp.left.kind != NEGPROP:
                raise ValueError
            targets[imp.right.nid] = imp.left.name
    except (ValueError, IndexError):
        raise NotHardAutomaton("the body of O does not have the hard-automaton shape")
    if len(targets) != n + 3:
        raise NotHardAutomaton(f"expected {n+3} implications in the body of O")
    return HardLayout(n, flavor, targets, base)


class RoundRecord(object):
    """
    One round of a hard-automaton play: from an occurrence of O up to the
    next one.  `kind` is 'plain', 'V' or 'F' (with `k` the index of the X
    state entered and `label` the F_j label read), or None when the trace
    ends before the round is classified.
    """

    def __init__(self, index, start):
        self.index = index
        self.start = start
        self.end = None
        self.kind = None
        self.label = None
        self.k = None
        self.o_env = None
        self.x_envs = []
        self.tied = []
        self.pushes = []
        self.closed = False

    def __repr__(self):
        output = "<%s #%i %s steps %s-%s, p=%s, closed=%s>" % (type(self).__name__,
                                                               self.index,
                                                               self.name,
                                                               self.start,
                                                               self.end,
                                                               self.pushes,
                                                               self.closed)
        return tw_fill(output, subsequent_indent='    ')

    @property
    def name(self):
        if self.kind == 'F':
            return 'F_%i' % self.k
        return str(self.kind)


class ConformanceReport(_ReportBase):
    _title = 'Round Conformance Report'

    def __init__(self):
        _ReportBase.__init__(self)
        self.rounds_checked = 0


def _open_at(arena, env, step):
    return arena.closed_at.get(env.id, step + 1) > step


def round_analysis(trace, n=None, flavor=None):
    """
    Split a play of a hard automaton into rounds and check, at every round
    start, that the priority stack is the concatenation of the p-sequences
    of the unclosed rounds, that the new O binds the last open environment,
    that V-rounds close immediately and, when the input tree is an encoded
    game tree, that the unresolved F rounds match the inner priority stack.
    """

    a = trace.apka
    layout = hard_layout(a)
    if n is not None and n != layout.n:
        raise NotHardAutomaton(f"trace is from a hard automaton with n={layout.n}, not {n}")
    if flavor is not None and flavor.lower() != layout.flavor.lower():
        raise NotHardAutomaton(f"trace is from a {layout.flavor} automaton")

    arena = trace.arena
    report = ConformanceReport()
    rounds = []
    current = None
    entries = trace.entries
    base = [a.priority['I']]

    for i, entry in enumerate(entries):
        c = entry.config
        q = c.formula
        if q.kind == FIXVAR and q.name == 'O':
            if current is not None:
                current.end = entry.step
            step = entry.step

            # Expected stack from the rounds so far
            expected = list(base)
            unresolved = []
            for r in rounds + ([current] if current is not None else []):
                if r.kind == 'V':
                    if r.o_env is not None and _open_at(arena, r.o_env, step):
                        report.add(step, 'v-round', f"V-round #{r.index} is still open")
                    continue
                if r.o_env is None or not _open_at(arena, r.o_env, step):
                    continue
                if r.kind == 'F' and r.x_envs and _open_at(arena, r.x_envs[0], step):
                    expected.extend(layout.p_sequence('F', r.k))
                    unresolved.append(int(r.label.split('_', 1)[1]))
                else:
                    expected.extend(layout.p_sequence('plain'))
            if c.priorities != expected:
                report.add(step, 'stack-prio', "stack %s, expected %s" % (c.priorities, expected))

            # The new O binds the last open environment
            if i + 1 < len(entries) and entries[i+1].created is not None:
                bound = entries[i+1].created.bindings[0].env
                if bound is not c.computing:
                    report.add(step, 'binding', f"O binds {bound} instead of {c.computing}")
                if len(c.prios) and c.prios.top.owner is not c.computing:
                    report.add(step, 'binding', f"{c.computing} is not the last open environment")

            # Inner correspondence
            inner = getattr(c.node, 'inner_priorities', None)
            if inner is not None and list(inner) != unresolved:
                report.add(step, 'inner-stack', "unresolved F rounds %s, inner stack %s" % (unresolved, list(inner)))

            report.rounds_checked += 1
            if current is not None:
                rounds.append(current)
            current = RoundRecord(len(rounds), step)
            continue

        if current is None:
            continue
        if entry.rule == UNFOLD:
            current.tied.append(entry.created)
            current.pushes.append(c.prios.top.priority)
            creator = entry.created.creator
            if creator == 'O' and current.o_env is None:
                current.o_env = entry.created
            elif creator.startswith('X_'):
                current.x_envs.append(entry.created)
        if current.kind is None and q.nid in layout.targets:
            label = layout.targets[q.nid]
            if label in ('D', 'C'):
                current.kind = 'plain'
            elif label == 'V':
                current.kind = 'V'
            else:
                current.kind = 'F'
                current.label = label
                current.k = int(layout.state_for_label(label).split('_', 1)[1])

    if current is not None:
        rounds.append(current)
    if entries:
        last = entries[-1].step
        for r in rounds:
            r.closed = r.o_env is not None and not _open_at(arena, r.o_env, last)
            if r.kind == 'F' and r.end is not None and r.pushes != layout.p_sequence('F', r.k):
                report.add(r.start, 'p-sequence', "F round pushed %s" % r.pushes)
            if r.kind in ('plain', 'V') and r.end is not None and r.pushes != layout.p_sequence(r.kind):
                report.add(r.start, 'p-sequence', "%s round pushed %s" % (r.kind, r.pushes))

    return rounds, report
