import os
import sys
import logging

from krivine_automata.config import CapExceeded, Caps
from krivine_automata.syntax import (TypingContext, ParseError, TypeMismatch, UnboundVariable, parse,
                                     typecheck, format_type)
from krivine_automata.apka import load_apka, validate, complement
from krivine_automata.trees import TreeFormatError, load_tree, load_prefix, prefix, distance
from krivine_automata.machine import GameError, init_run, run_strategy
from krivine_automata.monitoring import check_run_invariants, stair_summary
from krivine_automata.operations import ScriptQueue, RandomLegalQueue, InteractiveQueue
from krivine_automata.denot import check_hfl, check_apka
from krivine_automata.translate import hfl_to_apka, apka_to_hfl
from krivine_automata.hierarchy import FLAVORS, gen_hard, encode_game_tree, banach_iterate
from krivine_automata.filewriter import (TextWriter, ApkaWriter, PrefixWriter, FormulaWriter,
                                         TraceWriter)

__all__ = ['CommandUsageError', 'CommandBase', 'TypeCheck', 'Validate', 'Complement', 'Check',
           'Simulate', 'Translate', 'GenHard', 'Encode', 'Fixpoint', 'Distance',
           'CommandProcessor']


control_logger = logging.getLogger('__main__')


class CommandUsageError(ValueError):
    """
    A command was called with missing or contradictory arguments.
    """


def _read(filename):
    if filename == '-':
        return sys.stdin.read()
    with open(filename, 'r') as fh:
        return fh.read()


def _load_any_tree(filename):
    """
    Load either a regular tree or a prefix, whichever format the file is in.
    """

    text = _read(filename)
    try:
        return load_tree(text)
    except ParseError:
        return load_prefix(text)


class CommandBase(object):
    """
    Base class to hold one command-line operation.  Results go to standard
    output (or the named output files), progress goes to the log.
    """

    _required = ()
    _optional = ()

    def __init__(self, log, caps=None, stdout=None):
        self.log = log
        if caps is None:
            caps = Caps()
        self.caps = caps
        self.stdout = stdout

    @classmethod
    def attach_to_processor(cls, processor):
        kls = cls(processor.log, processor.caps, processor.stdout)
        setattr(processor, kls.subcommand.replace('-', '_'), kls)
        processor.commands[kls.subcommand] = kls
        return kls

    @property
    def command_name(self):
        """
        Command (class) name.
        """

        return type(self).__name__

    @property
    def subcommand(self):
        """
        Name of the command on the command line.
        """

        name = ''
        for c in self.command_name:
            if c.isupper() and name:
                name += '-'
            name += c.lower()
        return name

    def log_debug(self, *args):
        msg = "%s - "+args[0]
        self.log.debug(msg, self.command_name, *args[1:])

    def log_info(self, *args):
        msg = "%s - "+args[0]
        self.log.info(msg, self.command_name, *args[1:])

    def log_warning(self, *args):
        msg = "%s - "+args[0]
        self.log.warning(msg, self.command_name, *args[1:])

    def log_error(self, *args):
        msg = "%s - "+args[0]
        self.log.error(msg, self.command_name, *args[1:])

    def log_fatal(self, *args):
        msg = "%s - "+args[0]
        self.log.fatal(msg, self.command_name, *args[1:])

    def emit(self, text):
        """
        Write a result line to standard output.
        """

        if self.stdout is None:
            TextWriter('-').write(text)
        else:
            self.stdout.write(text if text.endswith('\n') else text+'\n')

    def action(self, *args, **kwds):
        """
        Action to be called when the command is processed.  It should accept
        only arguments in the same order as self._required and return a
        two-element tuple of (whether or not the property/operation
        succeeded, an info message).
        """

        raise NotImplementedError("Must be overridden by the subclass.")

    def __call__(self, **kwargs):
        """
        Execute the command.  Validate that all of the required keywords are
        present, pass them to self.action() and turn domain errors into a
        (False, exception) result.
        """

        data = {key: value for key, value in kwargs.items() if value is not None}
        try:
            args = [data[key] for key in self._required]
        except KeyError:
            missing = [key for key in self._required if key not in data]
            self.log_error("Missing required keywords - %s", ' '.join(missing))
            return False, CommandUsageError("Missing required keywords - %s" % (' '.join(missing),))
        kwds = {key: data[key] for key in self._optional if key in data}

        try:
            return self.action(*args, **kwds)
        except CapExceeded as e:
            self.log_error("Resource cap hit - %s", str(e))
            return False, e
        except (ValueError, TypeMismatch, UnboundVariable, GameError, OSError) as e:
            self.log_error("Failed - %s: %s", type(e).__name__, str(e))
            return False, e


class TypeCheck(CommandBase):
    """
    Type a closed HFL formula, or every transition body of an automaton.
    """

    subcommand = 'typecheck'
    _required = ('filename',)
    _optional = ('dialect',)

    def action(self, filename, dialect='hfl'):
        text = _read(filename)
        if dialect == 'hfl':
            f = parse(text, dialect='hfl')
            t = typecheck(TypingContext(), f, dialect='hfl')
            self.emit(format_type(t))
            return True, format_type(t)
        elif dialect == 'apka':
            a = load_apka(text)
            ctx = a.context()
            for x in a.states:
                local = ctx
                for name, t in a.lambda_sig[x]:
                    local = local.with_lambda(name, t)
                t = typecheck(local, a.delta[x], dialect='apka-body')
                self.log_debug("Body of %s has type %s", x, format_type(t))
                self.emit("%s : %s" % (x, format_type(a.state_type[x])))
            return True, "%i states" % len(a.states)
        raise CommandUsageError(f"unknown dialect '{dialect}'")


class Validate(CommandBase):
    """
    Check the well-formedness rules of an automaton and print every
    violation.
    """

    _required = ('filename',)

    def action(self, filename):
        a = load_apka(_read(filename))
        report = validate(a)
        for violation in report:
            self.emit(violation)
        if not report.ok:
            self.log_warning("%i violation(s) in %s", len(report), filename)
            return False, "%i violation(s)" % len(report)
        return True, 'valid'


class Complement(CommandBase):
    """
    Write the dual automaton.
    """

    _required = ('filename', 'output')

    def action(self, filename, output):
        a = load_apka(_read(filename))
        report = validate(a)
        if not report.ok:
            raise ValueError("automaton does not validate: %s" % '; '.join(report.violations))
        ApkaWriter(output).write(complement(a))
        return True, output


class Check(CommandBase):
    """
    Decide with the denotational oracle whether a formula or an automaton
    holds at a tree-state.
    """

    _required = ('tree', 'node')
    _optional = ('hfl', 'apka')

    def action(self, tree, node, hfl=None, apka=None):
        if (hfl is None) == (apka is None):
            raise CommandUsageError("exactly one of hfl and apka is needed")
        t = load_tree(_read(tree))
        if node not in t.tree_states:
            raise TreeFormatError(f"'{node}' is not a tree-state of {tree}")
        if hfl is not None:
            f = parse(_read(hfl), dialect='hfl', props=t.props)
            result = check_hfl(t, node, f, caps=self.caps)
        else:
            a = load_apka(_read(apka))
            report = validate(a)
            if not report.ok:
                raise ValueError("automaton does not validate: %s" % '; '.join(report.violations))
            result = check_apka(t, node, a, caps=self.caps)
        self.log_info("Result at %s: %s", node, result)
        self.emit('true' if result else 'false')
        return result, 'true' if result else 'false'


class Simulate(CommandBase):
    """
    Play the acceptance game of an automaton on a tree, scripted, random or
    interactive, and dump the trace with a stair summary.  With `monitors`
    the run invariants are checked as well.
    """

    _required = ('apka', 'tree')
    _optional = ('script', 'max_steps', 'interactive', 'monitors', 'random', 'rng_seed',
                 'show_formulas', 'node')

    def action(self, apka, tree, script=None, max_steps=1000, interactive=False, monitors=False,
               random=False, rng_seed=None, show_formulas=False, node=None):
        if sum([script is not None, bool(interactive), bool(random)]) > 1:
            raise CommandUsageError("script, interactive and random play are exclusive")
        a = load_apka(_read(apka))
        t = load_tree(_read(tree))

        if interactive:
            queue = InteractiveQueue(output=self.stdout)
        elif random:
            queue = RandomLegalQueue(seed=rng_seed)
        elif script is not None:
            queue = ScriptQueue.from_text(_read(script))
        else:
            queue = ScriptQueue()

        s = init_run(a, t, start=node)
        trace = run_strategy(s, queue, max_steps=max_steps, log=self.log)
        self.log_info("Run ended after %i configurations: %s", len(trace), trace.status)

        text = TraceWriter(None, show_formulas=show_formulas).render(trace)
        self.emit(text)

        status = True
        if monitors:
            report = check_run_invariants(trace)
            report.log_report(self.log)
            self.emit("// monitors: %s" % report.summary)
            if len(report):
                self.emit('\n'.join(["// %s" % line for line in report.format().split('\n')]))
                status = False
        summary = trace.summary
        if summary is None:
            summary = stair_summary(trace)
        summary.log_report(self.log)
        self.emit(summary.format())
        return status, trace.status


class Translate(CommandBase):
    """
    Translate between closed HFL formulas and automata.
    """

    _required = ('filename', 'to', 'output')

    def action(self, filename, to, output):
        text = _read(filename)
        if to == 'apka':
            a = hfl_to_apka(parse(text, dialect='hfl'))
            ApkaWriter(output).write(a)
            self.log_info("Wrote %i states to %s", len(a.states), output)
        elif to == 'hfl':
            f = apka_to_hfl(load_apka(text))
            FormulaWriter(output).write(f)
            self.log_info("Wrote formula to %s", output)
        else:
            raise CommandUsageError(f"cannot translate to '{to}'")
        return True, output


class GenHard(CommandBase):
    """
    Write the hard automaton of an alternation class.
    """

    _required = ('n', 'flavor', 'output')

    def action(self, n, flavor, output):
        matches = [f for f in FLAVORS if f.lower() == flavor.lower()]
        if not matches:
            raise CommandUsageError(f"unknown class '{flavor}'")
        a = gen_hard(n, matches[0])
        ApkaWriter(output).write(a)
        self.log_info("Wrote the %s_%i hard automaton to %s", matches[0], n, output)
        return True, output


class Encode(CommandBase):
    """
    Write a prefix of the game tree encoding an automaton over a tree.
    """

    _required = ('tree', 'apka', 'depth', 'output')

    def action(self, tree, apka, depth, output):
        t = load_tree(_read(tree))
        a = load_apka(_read(apka))
        handle = encode_game_tree(t, a)
        p = prefix(handle, depth, caps=self.caps)
        PrefixWriter(output, single_label=True).write(p)
        self.log_info("Encoded %i game nodes over %s_%i", handle.generated, handle.vocab.flavor, handle.vocab.n)
        return True, output


class Fixpoint(CommandBase):
    """
    Iterate the game-tree encoding from a seed tree, write the prefix of the
    last iterate and print the convergence report.
    """

    _required = ('apka', 'seed', 'iters', 'depth', 'output')

    def action(self, apka, seed, iters, depth, output):
        a = load_apka(_read(apka))
        t = load_tree(_read(seed))
        p, report = banach_iterate(a, t, iters=iters, depth=depth, caps=self.caps, log=self.log)
        PrefixWriter(output, single_label=True).write(p)
        self.emit('\n'.join(["// %s" % line for line in report.format().split('\n')]))
        return True, "residual %r" % report.residual


class Distance(CommandBase):
    """
    Print the dyadic distance between two trees or prefixes.
    """

    _required = ('first', 'second', 'cap')

    def action(self, first, second, cap):
        a = _load_any_tree(first)
        b = _load_any_tree(second)
        d = distance(a, b, cap, caps=self.caps)
        self.emit("%r %s%g" % (d, '' if d.exact else '<= ', d.value))
        return True, repr(d)


class CommandProcessor(object):
    """
    Holds one instance of every command, sharing a log, the resource caps
    and the output stream.  Supports:
     * typecheck
     * validate
     * complement
     * check
     * simulate
     * translate
     * gen-hard
     * encode
     * fixpoint
     * distance
    """

    _commands = (TypeCheck, Validate, Complement, Check, Simulate, Translate, GenHard,
                 Encode, Fixpoint, Distance)

    def __init__(self, log=None, caps=None, stdout=None):
        if log is None:
            log = control_logger
        self.log = log
        if caps is None:
            caps = Caps()
        self.caps = caps
        self.stdout = stdout
        self.pid = os.getpid()

        self.commands = {}
        for cls in self._commands:
            cls.attach_to_processor(self)

    def __call__(self, subcommand, **kwargs):
        try:
            command = self.commands[subcommand]
        except KeyError:
            return False, CommandUsageError(f"unknown command '{subcommand}'")
        return command(**kwargs)
