import random

import pytest
from hypothesis import given, settings, strategies as st

from krivine_automata.machine import *
from krivine_automata.machine import format_digits
from krivine_automata.syntax import format_formula
from krivine_automata.apka import load_apka
from krivine_automata.trees import RegularTree
from krivine_automata.denot import check_apka
from krivine_automata.monitoring import check_run_invariants
from krivine_automata.operations import ScriptQueue, RandomLegalQueue

from corpus import random_apka, random_tree


# (depth, formula, |stack|, priority stack) of every configuration of the
# scripted play of ex1 on ex2
SCRIPTED_PLAY = [
    (0, 'I', 0, ()),
    (0, '(X (! P))', 0, (1,)),
    (0, 'X', 1, (1,)),
    (0, '(<> x) \\/ ([] Y)', 0, (1, 1)),
    (0, '[] Y', 0, (1, 1)),
    (1, 'Y', 0, (1, 1)),
    (1, '(X Y)', 0, (1, 1, 0)),
    (1, 'X', 1, (1, 1, 0)),
    (1, '(<> x) \\/ ([] Y)', 0, (1, 1, 0, 1)),
    (1, '<> x', 0, (1, 1, 0, 1)),
    (2, 'x', 0, (1, 1, 0, 1)),
    (2, 'x', 0, (1, 1, 0)),
    (2, 'Y', 0, (1, 1, 0)),
    (2, '(X Y)', 0, (1, 1, 0, 0)),
    (2, 'X', 1, (1, 1, 0, 0)),
    (2, '(<> x) \\/ ([] Y)', 0, (1, 1, 0, 0, 1)),
    (2, '<> x', 0, (1, 1, 0, 0, 1)),
    (3, 'x', 0, (1, 1, 0, 0, 1)),
    (3, 'x', 0, (1, 1, 0, 0)),
    (3, 'Y', 0, (1, 1, 0, 0)),
]


def test_scripted_play_projection(ex1, ex2, example_script):
    trace = run_script(init_run(ex1, ex2), example_script, max_steps=20)
    assert len(trace) == 20
    assert trace.status == 'MaxSteps'
    assert trace.projection() == SCRIPTED_PLAY
    rules = [entry.rule for entry in trace.entries]
    assert rules[11] == RETURN
    assert rules[12] == DEREF_GROUND
    assert [entry.choice for entry in trace.entries if entry.choice] == ['R', 'R', 'L', 'L', 'L', 'L']


def test_initial_unfolding_uses_fresh_environment(ex1, ex2):
    s = init_run(ex1, ex2)
    assert s.config.current.env is s.arena.empty
    step(s)
    e1 = s.config.computing
    assert e1.id == 1
    assert e1.parent is s.arena.empty
    assert e1.creator == 'I'


def test_trace_dump(ex1, ex2, example_script):
    trace = run_script(init_run(ex1, ex2), example_script, max_steps=20)
    lines = format_trace(trace).strip().split('\n')
    steps = [line for line in lines if line.startswith('step')]
    assert len(steps) == 20
    assert steps[0] == 'step0 | node=n0 depth=0 | Q=0 | env=e0 comp=e0 | |G|=0 | D=ε'
    assert steps[12].endswith('D=110')
    assert steps[17].endswith('D=11001')
    assert lines[-1].startswith('// MaxSteps')

    table = format_trace(trace, show_formulas=True).split('\n')
    assert table[0] == '// q0 = I'


def test_format_digits():
    assert format_digits([]) == 'ε'
    assert format_digits([1, 0, 12]) == '10[12]'


def test_choice_protocol(ex1, ex2):
    s = init_run(ex1, ex2)
    with pytest.raises(GameError):
        step(s, 'L')
    for _ in range(3):
        step(s)
    before = s.step
    outcome = step(s)
    assert isinstance(outcome, ExistsChoice)
    assert s.step == before
    assert [opt.choice for opt in outcome.options] == ['L', 'R']
    with pytest.raises(GameError):
        step(s, 'X')
    step(s, 'L')
    assert s.config.formula.kind == 'diamond'


def test_literal_ends_the_game(ex1, ex2):
    # Diamond branch, then the ground argument !P evaluated at n1
    trace = run_script(init_run(ex1, ex2), 'L L', max_steps=100)
    assert trace.status == 'ForallWins'
    assert trace.decided
    s = init_run(ex1, ex2)
    run_strategy(s, ScriptQueue(['L', 'L']))
    assert s.finished is not None
    with pytest.raises(GameError):
        step(s)


def test_needs_choice(ex1, ex2):
    trace = run_script(init_run(ex1, ex2), '', max_steps=100)
    assert trace.status == 'NeedsChoice'
    assert trace.summary is not None


def test_start_node(ex1, ex2):
    s = init_run(ex1, ex2, start='n2')
    assert s.config.node == 'n2'
    with pytest.raises(GameError):
        init_run(ex1, ex2, start='nowhere')


def test_legal_choices(ex1, ex2):
    s = init_run(ex1, ex2)
    assert legal_choices(s) == []
    for _ in range(3):
        step(s)
    assert legal_choices(s) == ['L', 'R']


def test_fork_is_independent(ex1, ex2, example_script):
    s = init_run(ex1, ex2)
    for _ in range(3):
        step(s)
    t = s.fork()
    step(t, 'R')
    assert s.step == 3
    assert t.step == 4
    assert len(s.arena) == 3


@given(st.integers(min_value=0, max_value=2**32))
@settings(max_examples=25)
def test_runs_are_deterministic(seed):
    rng = random.Random(seed)
    a = random_apka(rng)
    t = random_tree(rng)
    first = run_strategy(init_run(a, t), RandomLegalQueue(seed=seed), max_steps=150)
    second = run_strategy(init_run(a, t), RandomLegalQueue(seed=seed), max_steps=150)
    assert first.projection() == second.projection()
    assert first.status == second.status


PAIR = """props P Q
init I
state I : Pr {{ prio 0 ; body ((X P) Q) }}
state X : Pr -> Pr -> Pr {{ prio 0 ; args x:Pr, y:Pr ; body {body} }}
"""


@pytest.mark.parametrize('body,literal,status', [('x', 'P', 'ExistsWins'),
                                                 ('y', 'Q', 'ForallWins')])
def test_arguments_bind_in_declaration_order(body, literal, status):
    a = load_apka(PAIR.format(body=body))
    t = RegularTree(['P', 'Q'], ['n0'], {'n0': ['P']}, {'n0': 'n0'}, {'n0': 'n0'}, 'n0')
    trace = run_script(init_run(a, t), '', max_steps=100)
    assert trace.status == status
    assert format_formula(trace.entries[-1].config.formula) == literal
    assert (status == 'ExistsWins') == check_apka(t, 'n0', a)

    unfolded = [entry.created for entry in trace.entries if entry.created is not None]
    assert [format_formula(cl.formula) for cl in unfolded[-1].bindings] == ['P', 'Q']
    assert check_run_invariants(trace).ok


@given(st.integers(min_value=0, max_value=2**32))
@settings(max_examples=25)
def test_deterministic_plays_match_the_oracle(seed):
    rng = random.Random(seed)
    a = random_apka(rng, choices=False)
    t = random_tree(rng)
    trace = run_strategy(init_run(a, t), ScriptQueue(), max_steps=500)
    assert trace.status != 'NeedsChoice'
    if trace.decided:
        assert (trace.status == 'ExistsWins') == check_apka(t, t.root, a)
