import os
import random

import hypothesis
import pytest

from krivine_automata.paths import DATA
from krivine_automata.syntax import parse
from krivine_automata.apka import load_apka
from krivine_automata.trees import load_tree

hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.register_profile("ci", max_examples=50, deadline=None)
hypothesis.settings.register_profile("debugger", report_multiple_bugs=False, deadline=None)
hypothesis.settings.load_profile(os.getenv('HYPOTHESIS_PROFILE', 'fast'))


def pytest_addoption(parser):
    parser.addoption('--rng-seed', type=int, default=1234,
                     help='seed for the randomized corpora')
    parser.addoption('--runslow', action='store_true', default=False,
                     help='run the full-size sweeps')


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: full-size sweeps, run with --runslow')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip_slow = pytest.mark.skip(reason='needs --runslow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)


def _read(name):
    with open(os.path.join(DATA, name), 'r') as fh:
        return fh.read()


@pytest.fixture
def rng(request):
    return random.Random(request.config.getoption('--rng-seed'))


@pytest.fixture
def data_path():
    def _path(name):
        return os.path.join(DATA, name)
    return _path


@pytest.fixture
def ex1():
    return load_apka(_read('ex1.apka'))


@pytest.fixture
def ex2():
    return load_tree(_read('ex2.tree'))


@pytest.fixture
def example_script():
    return _read('ex1_on_ex2.script')


@pytest.fixture
def ex1_hfl():
    return parse(_read('ex1.hfl'), dialect='hfl')
