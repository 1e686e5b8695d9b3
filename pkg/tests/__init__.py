"""
Test package for fog-match.

Unit tests for the channel model, matching, coded caching, outage
estimation and analysis modules, and the fog-match.py command line.
"""
