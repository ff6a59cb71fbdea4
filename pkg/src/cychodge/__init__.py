"""Exact-arithmetic workbench for cyclic homology and Hodge-structure identities.

All computations run over exact rationals on finitely truncated coefficient
rings, so every check in this package is an exact identity test: there are no
floats and no tolerances anywhere.
"""

__version__ = "0.1.0"
