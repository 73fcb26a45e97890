"""Desk-scale toolkit for the product-case caloron correspondence.

Subpackages:
  symbolic   exact expansion and closed formulas for caloron class integrands
  lattice    periodic grids, U(1)/SU(2) arithmetic, forms, links, samples
  transform  the connection/Higgs correspondence and curvature decomposition
  chernweil  invariant polynomials, fiber integration, caloron classes
  universal  graph model of the universal connection and its curvature
  cli        the `caloron` command-line front end
"""

__version__ = "0.1.0"
