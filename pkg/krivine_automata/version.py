# This file is automatically generated by setup.py

version = '0.1.0+unknown'
full_version = '0.1.0+unknown'
short_version = '0.1'
local_version = 'unknown'
