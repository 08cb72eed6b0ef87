import os

__all__ = ['DATA', 'TEMPLATES', 'CAPS_FILE']

DATA = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'data')
TEMPLATES = os.path.join(DATA, 'templates')
CAPS_FILE = os.path.join(DATA, 'caps.json')
