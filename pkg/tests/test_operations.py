import io

import pytest

from krivine_automata.syntax import ParseError
from krivine_automata.trees import RegularTree
from krivine_automata.machine import init_run, run_strategy
from krivine_automata.hierarchy import vocab, gen_hard
from krivine_automata.operations import *


def test_parse_script():
    assert parse_script('L R // comment R\n  R\n') == ['L', 'R', 'R']
    assert parse_script('') == []
    with pytest.raises(ParseError) as excinfo:
        parse_script('L\nR X')
    assert excinfo.value.line == 2
    assert excinfo.value.column == 3


def test_script_queue():
    q = ScriptQueue.from_text('L R')
    assert len(q) == 2
    assert q.active == 'L'
    q.set_active_accepted()
    assert q.active == 'R'
    q.append('L')
    assert not q.empty
    with pytest.raises(ValueError):
        q.append('Q')


def test_script_queue_drives_a_run(ex1, ex2, example_script):
    q = ScriptQueue.from_text(example_script)
    trace = run_strategy(init_run(ex1, ex2), q, max_steps=20)
    assert q.empty
    assert q.taken == ['R', 'R', 'L', 'L', 'L', 'L']
    assert len(trace) == 20


def test_random_queue_is_seeded(ex1, ex2):
    first = run_strategy(init_run(ex1, ex2), RandomLegalQueue(seed=7), max_steps=60)
    second = run_strategy(init_run(ex1, ex2), RandomLegalQueue(seed=7), max_steps=60)
    assert first.projection() == second.projection()


def test_interactive_queue(ex1, ex2):
    answers = iter(['?', 'l', 'L'])
    out = io.StringIO()
    q = InteractiveQueue(input_fn=lambda prompt: next(answers), output=out)
    trace = run_strategy(init_run(ex1, ex2), q, max_steps=100)
    assert trace.status == 'ForallWins'
    assert q.taken == ['L', 'L']
    assert 'please answer' in out.getvalue()
    assert 'L: <> x @ n0' in out.getvalue()


def test_interactive_queue_quits(ex1, ex2):
    def _eof(prompt):
        raise EOFError
    q = InteractiveQueue(input_fn=_eof, output=io.StringIO())
    trace = run_strategy(init_run(ex1, ex2), q, max_steps=100)
    assert trace.status == 'NeedsChoice'


@pytest.mark.parametrize('seed', range(20))
def test_random_player_takes_immediate_wins(seed):
    # Taking T at the root wins; following D leads to an F node and loses
    voc = vocab(1, 'Sigma')
    t = RegularTree(voc.props, ['n0', 'n1'], {'n0': ['T', 'D'], 'n1': ['F']},
                    {'n0': 'n1', 'n1': 'n1'}, {'n0': 'n1', 'n1': 'n1'}, 'n0')
    trace = run_strategy(init_run(gen_hard(1, 'Sigma'), t), RandomLegalQueue(seed=seed), max_steps=100)
    assert trace.status == 'ExistsWins'
    assert all(entry.config.node == 'n0' for entry in trace.entries)
