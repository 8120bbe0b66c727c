"""Exact computer algebra for supertranslation algebras: weighted-flag de Rham
complexes, homotopy transfer to generalized Dolbeault cohomology, and homotopy
Poisson-Chern-Simons brackets."""

__version__ = "0.1.0"
