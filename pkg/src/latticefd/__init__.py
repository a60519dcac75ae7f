"""Fermion-doubling analysis for discrete-spacetime Dirac schemes.

Submodules: lattice, schemes, fourier, doublers, greens, evolve, symmetry,
covering, verify, cli.  Import them directly, e.g.
``from latticefd.doublers import scan_doublers``.
"""

__version__ = "0.1.0"
__all__ = ["lattice", "schemes", "fourier", "doublers", "greens", "evolve", "symmetry",
           "covering", "verify", "cli"]
