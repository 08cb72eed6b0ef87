import pytest

from krivine_automata.config import *
from krivine_automata.syntax import make_type, PR


def test_defaults():
    caps = load_caps(environ={})
    assert caps.states == 4
    assert caps.order == 1
    assert caps.depth == 16
    assert not caps.higher_order


def test_environment_and_overrides():
    caps = load_caps(environ={'APKA_CAPS': 'states=6, depth=3'})
    assert (caps.states, caps.depth) == (6, 3)
    caps = load_caps(environ={'APKA_CAPS': 'states=6'}, overrides='states=2,higher_order=yes')
    assert caps.states == 2
    assert caps.higher_order


@pytest.mark.parametrize('text', ['states', 'colour=3', 'depth=-1', 'order=high'])
def test_malformed(text):
    with pytest.raises(ValueError):
        parse_caps_string(text)
    with pytest.raises(ValueError):
        load_caps(environ={'APKA_CAPS': text})


def test_checks():
    caps = Caps(states=2)
    caps.check('states', 2)
    with pytest.raises(CapExceeded) as excinfo:
        caps.check('states', 3)
    assert excinfo.value.cap == 'states'
    assert excinfo.value.needed == 3

    second = make_type([make_type([PR])])
    with pytest.raises(CapExceeded):
        caps.check_type(second)
    caps.replace(higher_order=True).check_type(second)
