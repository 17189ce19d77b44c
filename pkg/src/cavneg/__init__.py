"""Tripartite entanglement dynamics of three lossy optical cavities.

Three single-mode cavities, each truncated to at most one photon, couple to
independent baths with configurable spectral densities.  The package evolves
the joint 8x8 density matrix under a time-local master equation with
time-dependent coefficients, measures entanglement through the 1|23
negativity, and cross-validates the deterministic solution against a
non-Markovian quantum-jump Monte Carlo ensemble.

Units: hbar = 1 and the common cavity frequency omega_c = 1, so every rate
is in omega_c units and time is in omega_c**-1.
"""

__version__ = "0.1.0"
