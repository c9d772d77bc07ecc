"""Numerical experiments for parabolic pseudodifferential equations with fractional symbols.

Submodules
----------
symbols     symbol classes, brackets and finite-difference class certification
quantize    space-time grids and Fourier quantization of symbols
spaces      anisotropic Sobolev, Besov and Hoelder norms and regularity scans
parabolic   solves, parametrices and regularity-lifting experiments
dirichlet   restricted fractional Laplacian on an interval with Dirichlet exterior data
experiments named experiment pipelines (used by the ``fracheat`` CLI)
"""

__version__ = "0.1.0"
