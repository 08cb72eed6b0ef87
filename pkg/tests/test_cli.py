import logging

import pytest

from krivine_automata.machine import GameError
from krivine_automata.control import CommandBase
from krivine_automata.cli import *
from krivine_automata.version import version as ka_version


def _run(capsys, *argv):
    code = run_cli(list(argv))
    out, err = capsys.readouterr()
    return code, out


def test_check(capsys, data_path):
    code, out = _run(capsys, 'check', '--tree', data_path('ex2.tree'), '--node', 'n0',
                     '--apka', data_path('ex1.apka'))
    assert code == EXIT_OK
    assert out.strip() == 'true'

    code, out = _run(capsys, 'check', '--tree', data_path('ex2.tree'), '--node', 'n2',
                     '--hfl', data_path('ex1.hfl'))
    assert code == EXIT_OK
    assert out.strip() == 'true'


def test_check_false(capsys, data_path, tmp_path):
    formula = tmp_path / 'p.hfl'
    formula.write_text('P\n')
    code, out = _run(capsys, 'check', '--tree', data_path('ex2.tree'), '--node', 'n2',
                     '--hfl', str(formula))
    assert code == EXIT_FALSE
    assert out.strip() == 'false'


def test_simulate_scripted_play(capsys, data_path):
    code, out = _run(capsys, 'simulate', '--apka', data_path('ex1.apka'), '--tree', data_path('ex2.tree'),
                     '--script', data_path('ex1_on_ex2.script'), '--max-steps', '20', '--monitors')
    assert code == EXIT_OK
    lines = out.split('\n')
    steps = [line for line in lines if line.startswith('step')]
    assert len(steps) == 20
    assert steps[-1].endswith('D=1100')
    assert '// monitors: normal' in lines


def test_simulate_random(capsys, data_path):
    first = _run(capsys, 'simulate', '--apka', data_path('ex1.apka'), '--tree', data_path('ex2.tree'),
                 '--random', '--rng-seed', '7', '--max-steps', '50')
    second = _run(capsys, 'simulate', '--apka', data_path('ex1.apka'), '--tree', data_path('ex2.tree'),
                  '--random', '--rng-seed', '7', '--max-steps', '50')
    assert first == second
    assert first[0] == EXIT_OK


def test_generated_automata_validate(capsys, tmp_path):
    output = str(tmp_path / 'hard.apka')
    code, _ = _run(capsys, 'gen-hard', '--n', '2', '--class', 'pi', '-o', output)
    assert code == EXIT_OK
    code, out = _run(capsys, 'validate', output)
    assert code == EXIT_OK
    assert out == ''
    code, out = _run(capsys, 'typecheck', '--dialect', 'apka', output)
    assert code == EXIT_OK
    assert out.split('\n')[:2] == ['I : Pr', 'O : Pr -> Pr']


def test_translate_and_complement(capsys, data_path, tmp_path):
    formula = str(tmp_path / 'ex1.hfl')
    code, _ = _run(capsys, 'translate', data_path('ex1.apka'), '--to', 'hfl', '-o', formula)
    assert code == EXIT_OK
    code, out = _run(capsys, 'typecheck', formula)
    assert out.strip() == 'Pr'

    dual = str(tmp_path / 'dual.apka')
    code, _ = _run(capsys, 'complement', data_path('ex1.apka'), '-o', dual)
    assert code == EXIT_OK
    code, out = _run(capsys, 'check', '--tree', data_path('ex2.tree'), '--node', 'n0', '--apka', dual)
    assert code == EXIT_FALSE
    assert out.strip() == 'false'


def test_encode_and_distance(capsys, data_path, tmp_path):
    encoded = str(tmp_path / 'encoded.prefix')
    code, _ = _run(capsys, 'encode', '--tree', data_path('ex2.tree'), '--apka', data_path('ex1.apka'),
                   '--depth', '3', '-o', encoded)
    assert code == EXIT_OK
    code, out = _run(capsys, 'distance', encoded, encoded)
    assert code == EXIT_OK
    assert out.startswith('AtMost(4)')

    code, out = _run(capsys, 'distance', data_path('ex2.tree'), data_path('ex2.tree'), '--cap', '5')
    assert out.startswith('AtMost(5)')


def test_fixpoint(capsys, tmp_path):
    hard = str(tmp_path / 'hard.apka')
    _run(capsys, 'gen-hard', '--n', '1', '-o', hard)
    seed = tmp_path / 'seed.tree'
    seed.write_text('props D C V T F F_0\nroot n0\nnode n0 { labels T ; left n0 ; right n0 }\n')
    code, out = _run(capsys, 'fixpoint', '--apka', hard, '--seed', str(seed), '--iters', '5',
                     '--depth', '3', '-o', str(tmp_path / 'fixed.prefix'))
    assert code == EXIT_OK
    assert '// residual: AtMost(3) (zero)' in out.split('\n')


def test_exit_codes(capsys, data_path):
    code, _ = _run(capsys, 'check', '--tree', data_path('ex2.tree'), '--apka', data_path('ex1.apka'))
    assert code == EXIT_USAGE
    code, _ = _run(capsys, 'check', '--tree', 'no-such.tree', '--node', 'n0', '--apka', data_path('ex1.apka'))
    assert code == EXIT_INPUT
    code, _ = _run(capsys, 'check', '--tree', data_path('ex2.tree'), '--node', 'n9', '--apka', data_path('ex1.apka'))
    assert code == EXIT_INPUT
    code, _ = _run(capsys, '--caps', 'states=1', 'check', '--tree', data_path('ex2.tree'), '--node', 'n0',
                   '--apka', data_path('ex1.apka'))
    assert code == EXIT_CAP
    code, _ = _run(capsys, '--caps', 'colors=3', 'check', '--tree', data_path('ex2.tree'), '--node', 'n0',
                   '--apka', data_path('ex1.apka'))
    assert code == EXIT_USAGE
    code, _ = _run(capsys, 'simulate', '--apka', data_path('ex1.apka'), '--tree', data_path('ex2.tree'),
                   '--random', '--interactive')
    assert code == EXIT_USAGE


def test_version(capsys):
    code, out = _run(capsys, '--version')
    assert code == EXIT_OK
    assert ka_version in out


@pytest.mark.parametrize('status,info,code', [(True, 'ok', EXIT_OK),
                                              (False, 'false', EXIT_FALSE),
                                              (False, KeyError('x'), EXIT_INPUT)])
def test_exit_status(status, info, code):
    assert exit_status(status, info) == code


class _Raising(CommandBase):
    _required = ('error',)

    def action(self, error):
        raise error


def test_domain_errors_become_results():
    status, info = _Raising(logging.getLogger('__main__'))(error=GameError('stuck'))
    assert status is False
    assert isinstance(info, GameError)
    assert exit_status(status, info) == EXIT_INPUT


def test_programming_errors_propagate():
    with pytest.raises(KeyError):
        _Raising(logging.getLogger('__main__'))(error=KeyError('bug'))
    with pytest.raises(RuntimeError):
        _Raising(logging.getLogger('__main__'))(error=RuntimeError('bug'))
