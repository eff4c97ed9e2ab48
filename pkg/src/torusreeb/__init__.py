"""Kronrod-Reeb graphs and orbit fundamental groups of functions on the 2-torus.

The package computes, for a Morse function on T^2 whose Kronrod-Reeb graph
contains a cycle: the graph itself, the annular decomposition along
non-separating level curves, the cyclic index n, and the wreath-product
presentation of the fundamental group of the function's orbit, together with
numerically verified model diffeomorphisms (twists, slides, rotations), the
eval/krot epimorphisms and the Z_n-quotient covering.
"""

__version__ = "0.1.0"
