import random

import pytest
from hypothesis import given, settings, strategies as st

from krivine_automata.config import Caps, CapExceeded
from krivine_automata.syntax import *
from krivine_automata.apka import complement, load_apka
from krivine_automata.trees import RegularTree, all_regular_trees
from krivine_automata.denot import *

from corpus import random_apka, random_tree, random_ground_formula, complement_corpus


def _line(props, labels):
    """
    A single infinite path (both successors equal) with the given labels,
    ending in a self-loop.
    """

    names = ['n%i' % i for i in range(len(labels))]
    succ = {s: names[min(i+1, len(names)-1)] for i, s in enumerate(names)}
    return RegularTree(props, names, dict(zip(names, labels)), succ, succ, names[0])


def test_example_acceptance(ex1, ex2, ex1_hfl):
    assert check_apka(ex2, 'n0', ex1)
    solution = solve_apka(ex2, ex1)
    assert members(ex2, solution['I']) == ['n0', 'n1', 'n2']
    for node in ex2.tree_states:
        assert check_hfl(ex2, node, ex1_hfl) == check_apka(ex2, node, ex1)


def test_ground_formulas():
    t = _line(['P'], [['P'], ['P'], []])
    assert members(t, eval_hfl(t, {}, parse('<> P'))) == ['n0']
    assert members(t, eval_hfl(t, {}, parse('mu X:Pr. ! P \\/ <> X'))) == ['n0', 'n1', 'n2']
    assert members(t, eval_hfl(t, {}, parse('nu X:Pr. P /\\ [] X'))) == []
    assert members(t, eval_hfl(t, {}, parse('mu X:Pr. [] X'))) == []
    assert members(t, eval_hfl(t, {}, parse('nu X:Pr. [] X'))) == ['n0', 'n1', 'n2']
    assert check_hfl(t, 'n2', parse('! P'))
    assert not check_hfl(t, 'n0', parse('Q'))


def test_free_variables_and_unused_bindings():
    t = _line(['P'], [['P'], []])
    f = parse('y \\/ <> y')
    assert eval_hfl(t, {'y': 0b10, 'z': 0b01}, f) == 0b11
    with pytest.raises(UnboundVariable):
        eval_hfl(t, {'z': 0b01}, f)


def test_order_one():
    t = _line(['P'], [[], [], ['P']])
    # An order-2 lambda is applied, never enumerated
    twice = parse('(\\f:Pr -> Pr. (f (f P)) \\x:Pr. (<> x) /\\ ! P)')
    assert members(t, eval_hfl(t, {}, twice)) == ['n0']
    t = _line(['P'], [['P'], []])
    g = parse('((mu F:Pr -> Pr. \\x:Pr. x \\/ (F <> x)) P)')
    assert members(t, eval_hfl(t, {}, g)) == ['n0']
    with pytest.raises(CapExceeded):
        eval_hfl(t, {}, g, caps=Caps(order=0))


def test_lattices():
    t = _line(['P'], [['P'], []])
    d = SemanticDomain(t)
    assert d.elements(PR) == [0, 1, 2, 3]
    fn = make_type([PR])
    # Pairs of monotone maps 2^2 -> 2
    assert len(d.elements(fn)) == 36
    assert all(d.is_monotone(fn, v) for v in d.elements(fn))
    assert d.leq(fn, d.bottom(fn), d.top(fn))
    assert d.key(d.join(fn, d.bottom(fn), d.top(fn))) == d.key(d.top(fn))
    assert d.pre_exists(0b10) == 0b11
    assert d.pre_forall(0b01) == 0


def test_caps():
    t = _line(['P'], [['P'], [], [], [], []])
    with pytest.raises(CapExceeded):
        SemanticDomain(t)
    SemanticDomain(t, Caps(states=5))
    small = _line(['P'], [['P'], []])
    with pytest.raises(CapExceeded):
        check_hfl(small, 'n0', parse('((mu F:(Pr -> Pr) -> Pr. \\g:Pr -> Pr. (g P)) \\x:Pr. x)'))
    check_hfl(small, 'n0', parse('((mu F:(Pr -> Pr) -> Pr. \\g:Pr -> Pr. (g P)) \\x:Pr. x)'),
              caps=Caps(higher_order=True))
    with pytest.raises(CapExceeded):
        SemanticDomain(small, Caps(lattice=2)).elements(PR)



def test_iteration_cap_is_per_fixpoint():
    t = _line(['P'], [['P'], []])
    a = load_apka("props P\ninit I\n"
                  "state I : Pr { prio 2 ; body P }\n"
                  "state A : Pr { prio 1 ; body P }\n"
                  "state B : Pr { prio 0 ; body P }\n")
    # Every group stabilizes on its second round, 14 rounds in total
    solution = solve_apka(t, a, caps=Caps(iterations=2))
    assert solution == {'I': 0b01, 'A': 0b01, 'B': 0b01}
    with pytest.raises(CapExceeded):
        solve_apka(t, a, caps=Caps(iterations=1))


def test_mu_nu_duality():
    t = _line(['P', 'Q'], [['P'], ['Q'], []])
    for text in ['mu X:Pr. P \\/ <> X', 'nu X:Pr. Q /\\ [] X', 'mu X:Pr. (nu Y:Pr. P /\\ <> Y) \\/ [] X']:
        f = parse(text)
        g = dualize(f)
        assert eval_hfl(t, {}, g) == (~eval_hfl(t, {}, f)) & 0b111


@given(st.integers(min_value=0, max_value=2**32))
@settings(max_examples=25)
def test_complement_negates(seed):
    rng = random.Random(seed)
    a = random_apka(rng)
    t = random_tree(rng)
    c = complement(a)
    for node in t.tree_states:
        assert check_apka(t, node, c) != check_apka(t, node, a)


@given(st.integers(min_value=0, max_value=2**32))
@settings(max_examples=25)
def test_dual_formula_negates(seed):
    rng = random.Random(seed)
    f = random_ground_formula(rng, depth=4)
    t = random_tree(rng)
    assert eval_hfl(t, {}, dualize(f)) == (~eval_hfl(t, {}, f)) & ((1 << len(t.tree_states)) - 1)


@pytest.mark.slow
def test_complement_sweep(rng):
    trees = list(all_regular_trees(['P', 'Q'], 2))
    for a in complement_corpus(rng, 50):
        c = complement(a)
        for t in trees:
            assert check_apka(t, t.root, c) != check_apka(t, t.root, a)
