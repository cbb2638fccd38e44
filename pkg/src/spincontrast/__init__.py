"""Optimal-control toolkit for spin saturation and two-species contrast.

Modules: ``model`` (normalized rates, fields, brackets), ``geometry``
(singular loci and feedback controls), ``extremal_flow`` (Hamiltonian lifts,
control laws, arc integration), ``conjugate`` (Jacobi fields and conjugate
times), ``synthesis`` (time-minimal saturation policies), ``contrast``
(indirect shooting with continuation), ``report`` (artifacts), ``cli``.
"""

from . import conjugate, contrast, extremal_flow, geometry, model, report, synthesis

__version__ = "0.1.0"
