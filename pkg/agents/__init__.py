"""
Agent modules for the B3/C3 orbit-function toolkit.
"""
