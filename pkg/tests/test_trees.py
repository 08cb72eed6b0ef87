import pytest
import numpy as np

from krivine_automata.config import Caps, CapExceeded
from krivine_automata.syntax import ParseError
from krivine_automata.trees import *


def test_load_ex2(ex2):
    assert ex2.props == ['P']
    assert ex2.root == 'n0'
    assert ex2.tree_states == ['n0', 'n1', 'n2']
    assert ex2.holds('n1', 'P')
    assert not ex2.holds('n2', 'P')
    assert ex2.successor('n0', LEFT) == 'n1'
    assert ex2.states_at_level(2) == {'n2'}
    assert ex2.reachable() == ['n0', 'n1', 'n2']


def test_dump_is_stable(ex2):
    text = dump_tree(ex2)
    again = load_tree(text)
    assert dump_tree(again) == text
    assert again.labels == ex2.labels


@pytest.mark.parametrize('text', [
    "root a\nnode a { labels ; left b ; right a }\n",
    "props P\nroot a\nnode a { labels Q ; left a ; right a }\n",
    "root b\nnode a { labels ; left a ; right a }\n",
])
def test_malformed_trees(text):
    with pytest.raises(TreeFormatError):
        load_tree(text)


def test_duplicate_node():
    with pytest.raises(ParseError):
        load_tree("root a\nnode a { labels ; left a ; right a }\nnode a { labels ; left a ; right a }\n")


def test_prefix(ex2):
    p = prefix(ex2, 2)
    assert p.depth == 2
    assert p.n_nodes == 7
    assert [list(level) for level in p.levels] == [[1], [1, 1], [0, 0, 0, 0]]
    assert format_prefix(p) == '((P) ((P) (() # #) (() # #)) ((P) (() # #) (() # #)))'
    assert p.label_set((1, 1)) == frozenset(['P'])
    with pytest.raises(IndexError):
        p.successor((2, 0), LEFT)


def test_prefix_reload(ex2):
    p = prefix(ex2, 3)
    q = load_prefix(dump_prefix(p))
    assert q.props == p.props
    assert all(np.array_equal(a, b) for a, b in zip(p.levels, q.levels))
    assert load_prefix('props P\n(P # #)').levels[0][0] == 1
    with pytest.raises(TreeFormatError):
        load_prefix('(P (P # #) #)')


def test_prefix_depth_cap(ex2):
    with pytest.raises(CapExceeded):
        prefix(ex2, 5, caps=Caps(depth=4))


def test_distance(ex2):
    assert distance(ex2, ex2, 6) == AtMost(6)
    for level in range(4):
        other = perturb_at_level(ex2, level, 'P')
        assert distance(ex2, other, 8) == Exact(level)
        assert distance(prefix(ex2, 5), prefix(other, 5), 8) == Exact(level)
    # A prefix only witnesses agreement down to its own depth
    assert distance(prefix(ex2, 2), ex2, 8) == AtMost(3)
    assert Exact(2) > Exact(3)
    assert Exact(3).value == 0.125


def test_distance_needs_same_props(ex2):
    other = RegularTree(['Q'], ['a'], {}, {'a': 'a'}, {'a': 'a'}, 'a')
    with pytest.raises(TreeFormatError):
        distance(ex2, other, 3)


def test_all_regular_trees():
    trees = list(all_regular_trees(['P'], 1))
    assert len(trees) == 2
    assert len(list(all_regular_trees(['P'], 2))) == 2 + 4 * 2**4
