"""Finite-dimensional laboratory for spectral shift function identities.

Subpackages cover dense Hermitian linear algebra (:mod:`ssflab.spectral`),
eigenvalue-counting spectral shift constructions (:mod:`ssflab.ssf`),
double-operator-integral kernels (:mod:`ssflab.doi`), lattice Dirac
Schatten-class estimates (:mod:`ssflab.dirac`), and one-dimensional lattice
scattering with the Birman-Krein relation (:mod:`ssflab.scattering`).
"""

from . import (  # noqa: F401
    dirac,
    doi,
    functions,
    reports,
    scattering,
    spectral,
    ssf,
    suites,
)

__version__ = "0.1.0"
