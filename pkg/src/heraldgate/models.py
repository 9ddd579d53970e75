"""Hamiltonian assembly for both drive schemes.

The Hamiltonian is kept split as H = H_e + V + V(dagger), where H_e contains
the excited-manifold couplings (detunings, cavity couplings, and in the
two-photon scheme the microwave bridge) and V is the weak raising drive out
of |g>.  The split is what the effective-operator reduction consumes; the
integrator recombines the pieces with the drive envelope.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import Scheme, SystemParams
from .space import OperatorRep, ProductSpace, lindblad_set


@dataclass(frozen=True)
class ModelSplit:
    """H_e, the raising drive V, and the collapse operators on one space."""

    params: SystemParams
    space: ProductSpace
    H_e: OperatorRep
    V: OperatorRep
    lindblads: list

    def lindblad_matrices(self):
        return [op.matrix for op in self.lindblads]


def build_model(params: SystemParams) -> ModelSplit:
    """Assemble H_e, V and the Lindblad set for the given parameters."""
    space = ProductSpace.for_params(params)
    a = space.annihilator().matrix

    H_e = params.delta_E * space.aux_transition("E", "E").matrix
    cav_f = params.g_f * (a @ space.aux_transition("E", "f").matrix)
    H_e = H_e + cav_f + cav_f.conj().T
    for k in range(params.n_qubits):
        H_e = H_e + params.delta_e * space.qubit_transition(k, "e", "e").matrix
        cav_k = params.g * (a @ space.qubit_transition(k, "e", "1").matrix)
        H_e = H_e + cav_k + cav_k.conj().T

    if params.scheme is Scheme.TWO_PHOTON:
        H_e = H_e + params.delta_E2 * space.aux_transition("E2", "E2").matrix
        mw = 0.5 * params.omega_mw * space.aux_transition("E", "E2").matrix
        H_e = H_e + mw + mw.conj().T
        V = 0.5 * params.omega * space.aux_transition("E2", "g").matrix
    else:
        V = 0.5 * params.omega * space.aux_transition("E", "g").matrix

    return ModelSplit(params=params, space=space,
                      H_e=OperatorRep(H_e, space, "H_e"),
                      V=OperatorRep(V, space, "V"),
                      lindblads=lindblad_set(params, space))


def no_jump_hamiltonian(model: ModelSplit) -> OperatorRep:
    """H_NH = H_e - (i/2) sum_i L_i(dagger) L_i (drive V not included)."""
    H = model.H_e.matrix.astype(complex).copy()
    for L in model.lindblad_matrices():
        H = H - 0.5j * (L.conj().T @ L)
    return OperatorRep(H, model.space, "H_NH")
