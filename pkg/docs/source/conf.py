# Sphinx configuration for the krivine_automata documentation.

import os
import sys
import glob
import subprocess

sys.path.insert(0, os.path.abspath('../..'))

project = 'Krivine Automata'
copyright = '2026, krivine_automata developers'
author = 'krivine_automata developers'

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.doctest', 'sphinx.ext.intersphinx']
intersphinx_mapping = {'python': ('https://docs.python.org/3/', None),
                       'numpy': ('https://numpy.org/doc/stable/', None)}
autodoc_member_order = 'bysource'

templates_path = ['_templates']
exclude_patterns = []

html_theme = 'alabaster'
html_static_path = ['_static']


# Capture the command line help for using.rst
for script in sorted(glob.glob('../../scripts/*.py')):
    helpname = os.path.splitext(os.path.basename(script))[0] + '.help'
    try:
        text = subprocess.check_output([sys.executable, script, '--help'])
    except (OSError, subprocess.CalledProcessError):
        text = b"Help text unavailable"
    with open(helpname, 'wb') as fh:
        fh.write(text)
