"""
CLI middlewares.
"""
