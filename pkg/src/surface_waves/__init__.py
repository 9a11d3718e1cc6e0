"""
Surface waves on the boundary of a stratified dielectric half-space in contact
with a Lorentz-dispersive half-space.

Dispersion relations, admissibility regions and field profiles for interfacial
waves, plus the limiting cases (homogeneous layers, classical Leontovich
impedance, non-dispersive replacement of the Lorentz medium).
"""

__version__ = "0.1.0"
