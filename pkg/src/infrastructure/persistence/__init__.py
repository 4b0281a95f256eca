"""
Run directory and snapshot persistence.
"""
