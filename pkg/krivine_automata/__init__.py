"""
Alternating parity Krivine automata over infinite binary trees.
"""

from krivine_automata.version import version as __version__
