"""Verification and solving toolkit for the Sp(1) Seiberg-Witten equations in dimension 3.

Modules: :mod:`~sp1sw.quat` (pointwise algebra), :mod:`~sp1sw.chart`
(geometry on model charts), :mod:`~sp1sw.swop` (the operator stack),
:mod:`~sp1sw.torus` (spectral solver on the flat 3-torus),
:mod:`~sp1sw.product` (the ``S^1 x Sigma`` reduction) and
:mod:`~sp1sw.cli`.  Submodules are not imported here so the command line
can limit threads before numpy loads.
"""

__version__ = "0.1.0"
