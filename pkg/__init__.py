"""
Orbit Transforms
Discrete transforms and interpolation with Weyl-group orbit functions of B3 and C3.
"""

__version__ = "1.0.0"
__author__ = "Orbit Transforms"
