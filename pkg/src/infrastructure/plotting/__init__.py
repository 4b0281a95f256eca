"""
Figures written next to run outputs.
"""
