import os
import json
import logging
from textwrap import fill as tw_fill

from krivine_automata.paths import CAPS_FILE

__all__ = ['CapExceeded', 'Caps', 'parse_caps_string', 'load_caps']


config_logger = logging.getLogger('__main__')


class CapExceeded(RuntimeError):
    """
    A resource cap was hit.  `cap` names the cap, `limit` its value and
    `needed` what the computation asked for (if known).
    """

    def __init__(self, cap, limit, needed=None):
        self.cap = cap
        self.limit = limit
        self.needed = needed
        msg = f"resource cap '{cap}' exceeded (limit {limit}"
        if needed is not None:
            msg += f", needed {needed}"
        msg += ")"
        RuntimeError.__init__(self, msg)


class Caps(object):
    """
    Resource caps for the denotational oracle, prefix extraction and fixpoint
    iteration.
    """

    _fields = ('states', 'order', 'args', 'depth', 'lattice', 'iterations', 'higher_order')

    def __init__(self, states=4, order=1, args=2, depth=16, lattice=65536,
                 iterations=100000, higher_order=False):
        self.states = int(states)
        self.order = int(order)
        self.args = int(args)
        self.depth = int(depth)
        self.lattice = int(lattice)
        self.iterations = int(iterations)
        self.higher_order = bool(higher_order)

    def __repr__(self):
        output = "<%s %s>" % (type(self).__name__,
                              ', '.join(['%s=%s' % (f, getattr(self, f)) for f in self._fields]))
        return tw_fill(output, subsequent_indent='    ')

    def as_dict(self):
        return {f: getattr(self, f) for f in self._fields}

    def replace(self, **kwds):
        values = self.as_dict()
        for key, value in kwds.items():
            if key not in self._fields:
                raise ValueError(f"unknown cap '{key}'")
            values[key] = value
        return Caps(**values)

    def check(self, cap, needed):
        """
        Raise CapExceeded if `needed` is larger than the named cap.
        """

        limit = getattr(self, cap)
        if needed > limit:
            raise CapExceeded(cap, limit, needed)

    def check_type(self, t):
        """
        Enforce the order and arity caps on a type that must be evaluated,
        unless higher orders are explicitly allowed.
        """

        if self.higher_order:
            return
        if t.order > self.order:
            raise CapExceeded('order', self.order, t.order)
        if t.arity > self.args:
            raise CapExceeded('args', self.args, t.arity)


def parse_caps_string(text):
    """
    Parse a 'states=..,order=..,depth=..' override string into a dictionary.
    """

    values = {}
    for item in text.split(','):
        item = item.strip()
        if not item:
            continue
        try:
            key, value = item.split('=', 1)
        except ValueError:
            raise ValueError(f"invalid cap setting '{item}'")
        key = key.strip()
        value = value.strip()
        if key not in Caps._fields:
            raise ValueError(f"unknown cap '{key}'")
        if key == 'higher_order':
            values[key] = value.lower() in ('1', 'true', 'yes', 'on')
        else:
            try:
                values[key] = int(value, 10)
            except ValueError:
                raise ValueError(f"invalid value for '{key}': {value}")
            if values[key] < 0:
                raise ValueError(f"invalid value for '{key}': {value}")
    return values


def load_caps(filename=None, environ=None, overrides=None):
    """
    Build the active caps: defaults from the JSON file, then the APKA_CAPS
    environment variable, then explicit overrides (a string or dictionary).
    """

    if filename is None:
        filename = CAPS_FILE
    with open(filename, 'r') as fh:
        config = json.loads(fh.read())
    caps = Caps(**config)

    if environ is None:
        environ = os.environ
    env_caps = environ.get('APKA_CAPS', None)
    if env_caps:
        caps = caps.replace(**parse_caps_string(env_caps))
        config_logger.debug("Applied APKA_CAPS overrides: %s", env_caps)

    if overrides:
        if isinstance(overrides, str):
            overrides = parse_caps_string(overrides)
        caps = caps.replace(**overrides)
    return caps
