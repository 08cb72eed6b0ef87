import os
import sys
import logging
from textwrap import fill as tw_fill

import jinja2

from krivine_automata.paths import TEMPLATES

__all__ = ['render_template', 'FileWriterBase', 'TextWriter', 'ApkaWriter', 'TreeWriter',
           'PrefixWriter', 'FormulaWriter', 'TraceWriter']


filewriter_logger = logging.getLogger('__main__')

_ENV = jinja2.Environment(loader=jinja2.FileSystemLoader(TEMPLATES),
                          trim_blocks=True, lstrip_blocks=True,
                          keep_trailing_newline=True, autoescape=False)


def render_template(name, **kwds):
    """
    Render one of the package's serializer templates.
    """

    template = _ENV.get_template(name)
    return template.render(**kwds)


class FileWriterBase(object):
    """
    Class to represent an output destination for one of the text formats.  A
    filename of '-' writes to standard output.
    """

    def __init__(self, filename):
        if filename in (None, '-'):
            self.filename = '-'
        else:
            self.filename = os.path.abspath(filename)
        self._written = 0

    def __repr__(self):
        output = "<%s filename='%s', written=%i>" % (type(self).__name__,
                                                     self.filename,
                                                     self._written)
        return tw_fill(output, subsequent_indent='    ')

    @property
    def is_stdout(self):
        return self.filename == '-'

    def render(self, obj):
        """
        Turn `obj` into text.  To be overridden by sub-classes.
        """

        raise NotImplementedError

    def write(self, obj):
        """
        Render `obj` and write it out.  Returns the text written.
        """

        text = self.render(obj)
        if self.is_stdout:
            sys.stdout.write(text)
            sys.stdout.flush()
        else:
            with open(self.filename, 'w') as fh:
                fh.write(text)
        self._written += len(text)
        filewriter_logger.debug("Wrote %i characters to '%s'", len(text), self.filename)
        return text


class TextWriter(FileWriterBase):
    """
    Writer for text that is already rendered.
    """

    def render(self, obj):
        text = str(obj)
        if not text.endswith('\n'):
            text += '\n'
        return text


class ApkaWriter(FileWriterBase):
    def render(self, a):
        from krivine_automata.apka import dump_apka
        return dump_apka(a)


class TreeWriter(FileWriterBase):
    def render(self, t):
        from krivine_automata.trees import dump_tree
        return dump_tree(t)


class PrefixWriter(FileWriterBase):
    """
    Writer for prefix trees.  With `single_label` the labels of encoded game
    trees print as the one true proposition name.
    """

    def __init__(self, filename, single_label=False):
        FileWriterBase.__init__(self, filename)
        self.single_label = single_label

    def render(self, p):
        from krivine_automata.trees import dump_prefix
        return dump_prefix(p, single_label=self.single_label)


class FormulaWriter(FileWriterBase):
    def render(self, f):
        from krivine_automata.syntax import format_formula
        return render_template('formula.j2', formula=format_formula(f))


class TraceWriter(FileWriterBase):
    """
    Writer for run traces, optionally preceded by the subformula table.
    """

    def __init__(self, filename, show_formulas=False):
        FileWriterBase.__init__(self, filename)
        self.show_formulas = show_formulas

    def render(self, trace):
        from krivine_automata.machine import format_trace
        return format_trace(trace, show_formulas=self.show_formulas)
