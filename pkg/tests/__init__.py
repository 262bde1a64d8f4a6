"""
Test package for pybiharmonic.
"""
