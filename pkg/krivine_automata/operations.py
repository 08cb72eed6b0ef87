import re
import sys
import random
from textwrap import fill as tw_fill
from collections import deque

from krivine_automata.syntax import ParseError, DIAMOND, BOX
from krivine_automata.machine import CHOICES, legal_choices

__all__ = ['ChoiceQueueBase', 'ScriptQueue', 'RandomLegalQueue', 'InteractiveQueue',
           'LiftedQueue', 'parse_script']


_COMMENT = re.compile(r'//[^\n]*')


def parse_script(text):
    """
    Split a script into its L/R tokens.  Tokens are whitespace separated and
    `//` starts a comment that runs to the end of the line.
    """

    tokens = []
    for lineno, line in enumerate(text.split('\n'), start=1):
        line = _COMMENT.sub('', line)
        for m in re.finditer(r'\S+', line):
            token = m.group(0)
            if token not in CHOICES:
                raise ParseError(f"unexpected script token '{token}', expected L or R", lineno, m.start()+1)
            tokens.append(token)
    return tokens


class ChoiceQueueBase(object):
    """
    Base class for sources of choices at the choice points of a run.
    """

    def __init__(self):
        self._queue = deque([])
        self._taken = []

    def __repr__(self):
        output = "<%s pending=%i, taken=%i>" % (type(self).__name__, len(self), len(self._taken))
        return tw_fill(output, subsequent_indent='    ')

    def __len__(self):
        return len(self._queue)

    def __getitem__(self, idx):
        return self._queue[idx]

    @property
    def empty(self):
        """
        Whether or not there are any queued choices left.
        """

        return len(self) == 0

    @property
    def taken(self):
        """
        The choices handed out so far.
        """

        return list(self._taken)

    def choose(self, state, outcome):
        """
        Return 'L', 'R' or None (no choice available) for the choice point
        described by `outcome`.  To be overridden by sub-classes.
        """

        raise NotImplementedError

    def _hand_out(self, choice):
        if choice is not None:
            self._taken.append(choice)
        return choice


class ScriptQueue(ChoiceQueueBase):
    """
    Fixed sequence of choices, one per choice point regardless of which
    player owns it.
    """

    def __init__(self, tokens=()):
        ChoiceQueueBase.__init__(self)
        for token in tokens:
            self.append(token)

    @classmethod
    def from_text(cls, text):
        return cls(parse_script(text))

    def append(self, token):
        if token not in CHOICES:
            raise ValueError(f"invalid choice '{token}'")
        self._queue.append(token)

    @property
    def active(self):
        """
        The next choice or None if the script is exhausted.
        """

        activeop = None
        try:
            activeop = self._queue[0]
        except IndexError:
            pass
        return activeop

    def set_active_accepted(self):
        """
        Mark the next choice as used.
        """

        try:
            self._queue.popleft()
        except IndexError:
            pass

    def choose(self, state, outcome):
        choice = self.active
        self.set_active_accepted()
        return self._hand_out(choice)


class RandomLegalQueue(ChoiceQueueBase):
    """
    Random player that takes a move winning on the spot when there is one
    and otherwise never makes a move which loses on the spot.
    """

    def __init__(self, rng=None, seed=None):
        ChoiceQueueBase.__init__(self)
        if rng is None:
            rng = random.Random(seed)
        self.rng = rng

    def choose(self, state, outcome):
        return self._hand_out(self.rng.choice(legal_choices(state)))


class InteractiveQueue(ChoiceQueueBase):
    """
    Ask on the terminal: the prompt names the player and lists both options;
    'q' or end of input stops the run.
    """

    def __init__(self, input_fn=None, output=None):
        ChoiceQueueBase.__init__(self)
        self.input_fn = input if input_fn is None else input_fn
        self.output = sys.stdout if output is None else output

    def choose(self, state, outcome):
        symbol = '∃' if outcome.player == 'exists' else '∀'
        for opt in outcome.options:
            self.output.write("  %r\n" % opt)
        self.output.flush()
        while True:
            try:
                answer = self.input_fn(f"{symbol}? ").strip().upper()
            except EOFError:
                return None
            if answer == 'Q':
                return None
            if answer in CHOICES:
                return self._hand_out(answer)
            self.output.write("please answer L, R or q\n")


class LiftedQueue(ChoiceQueueBase):
    """
    Choices for a hard automaton playing on an encoded game tree that mirror
    a scripted play of the encoded automaton: a modal choice at a node whose
    configuration is a choice point takes the next script token, other modal
    choices go left, and boolean choices follow the node label.
    """

    def __init__(self, tokens=()):
        ChoiceQueueBase.__init__(self)
        self._queue.extend(tokens)

    def choose(self, state, outcome):
        q = state.config.formula
        if q.kind in (DIAMOND, BOX):
            node = state.config.node
            if getattr(node, 'is_choice', False):
                try:
                    return self._hand_out(self._queue.popleft())
                except IndexError:
                    return None
            return self._hand_out('L')
        return self._hand_out(legal_choices(state)[0])
