import os
import glob
from subprocess import check_call, check_output, CalledProcessError
from setuptools import setup, find_namespace_packages


_HERE = os.path.dirname(os.path.abspath(__file__))


def _git(*args):
    return check_output(['git']+list(args), cwd=_HERE).decode().strip()


def _git_is_dirty():
    dirty = False
    for args in (['diff-index', '--quiet', '--cached', 'HEAD', '--'], ['diff-files', '--quiet']):
        try:
            check_call(['git']+args, cwd=_HERE)
        except CalledProcessError:
            dirty = True
    return dirty


def get_version():
    """
    Build the version string: the release from VERSION plus a local part
    with the git branch and commit ('unknown' outside of a checkout).
    """

    with open(os.path.join(_HERE, 'VERSION'), 'r') as fh:
        release = fh.read().strip()

    local = 'unknown'
    try:
        branch = 'rtd' if os.getenv('READTHEDOCS', None) is not None else _git('branch', '--show-current')
        local = '%s.%s' % (branch, _git('log', '-n', '1', '--pretty=format:%H')[:7])
        if _git_is_dirty():
            local += '.dirty'
    except (CalledProcessError, OSError) as e:
        print(f"Failed to determine git repo versioning - {str(e)}")

    return release+'+'+local


def write_version_info():
    """Write the version info to a module in krivine_automata."""

    full = get_version()
    with open(os.path.join(_HERE, 'krivine_automata', 'version.py'), 'w') as fh:
        fh.write(f"""# This file is automatically generated by setup.py

version = '{full}'
full_version = '{full}'
short_version = '{'.'.join(full.split('.')[:2])}'
local_version = '{full.split('+', 1)[-1]}'
""")


# Update the version information
write_version_info()


setup(
    name = 'krivine_automata',
    version = get_version(),
    description = 'Alternating parity Krivine automata, higher-order fixpoint logic and the alternation hierarchy over binary trees',
    license='BSD3',
    packages=find_namespace_packages(include=['krivine_automata', 'krivine_automata.*']),
    scripts=glob.glob('scripts/*.py'),
    install_requires = ['numpy', 'jinja2', 'lark'],
    extras_require = {'test': ['pytest', 'hypothesis'],
                      'docs': ['sphinx']},
    package_data = {'krivine_automata': ['data/*.json', 'data/*.apka', 'data/*.tree',
                                         'data/*.script', 'data/*.hfl', 'data/templates/*.j2']},
    include_package_data = True,
    zip_safe = False
)
