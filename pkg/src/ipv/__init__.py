"""Ideal Poisson-Voronoi tessellations of hyperbolic space.

Sampling of the corona point process of ideal nuclei, the half-sphere
deposition model of the typical cell, closed-form laws, and a Monte-Carlo
verification harness.
"""

__version__ = "0.1.0"
