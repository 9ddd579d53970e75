"""Product-space bookkeeping and operator construction.

Basis ordering: auxiliary atom slowest, register qubits next (qubit 0 slower
than qubit 1, ...), cavity photon number fastest.  Each register atom carries
four levels

    "0"  uncoupled ground state
    "1"  cavity-coupled ground state
    "e"  optically excited state
    "o"  shelf state populated by spontaneous emission from "e"

and the auxiliary atom carries ("g", "f", "E") plus "E2" in the two-photon
scheme.  All operators are dense complex matrices; the spaces involved stay
below a few hundred dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .params import Scheme, SystemParams

QUBIT_LEVELS = ("0", "1", "e", "o")
AUX_LEVELS_DIRECT = ("g", "f", "E")
AUX_LEVELS_TWO_PHOTON = ("g", "f", "E", "E2")


@dataclass(frozen=True)
class BasisLabel:
    """One product basis state: auxiliary level, register levels, photon number."""

    aux: str
    qubits: tuple
    n_ph: int


@dataclass(frozen=True)
class ProductSpace:
    """Index arithmetic for the auxiliary x register x cavity product space."""

    n_qubits: int
    photon_cutoff: int
    aux_levels: tuple

    @classmethod
    def for_params(cls, params: SystemParams) -> "ProductSpace":
        aux = AUX_LEVELS_TWO_PHOTON if params.scheme is Scheme.TWO_PHOTON else AUX_LEVELS_DIRECT
        return cls(n_qubits=params.n_qubits, photon_cutoff=params.photon_cutoff, aux_levels=aux)

    @property
    def n_aux(self) -> int:
        return len(self.aux_levels)

    @property
    def n_photon(self) -> int:
        return self.photon_cutoff + 1

    @property
    def dim(self) -> int:
        return self.n_aux * 4 ** self.n_qubits * self.n_photon

    def index(self, label: BasisLabel) -> int:
        if label.aux not in self.aux_levels:
            raise KeyError(f"unknown auxiliary level {label.aux!r}")
        if len(label.qubits) != self.n_qubits:
            raise ValueError(f"expected {self.n_qubits} register levels, got {label.qubits!r}")
        if not 0 <= label.n_ph <= self.photon_cutoff:
            raise ValueError(f"photon number {label.n_ph} outside [0, {self.photon_cutoff}]")
        idx = self.aux_levels.index(label.aux)
        for q in label.qubits:
            idx = idx * 4 + QUBIT_LEVELS.index(q)
        return idx * self.n_photon + label.n_ph

    def label(self, index: int) -> BasisLabel:
        if not 0 <= index < self.dim:
            raise IndexError(index)
        index, n_ph = divmod(index, self.n_photon)
        qubits = []
        for _ in range(self.n_qubits):
            index, q = divmod(index, 4)
            qubits.append(QUBIT_LEVELS[q])
        return BasisLabel(aux=self.aux_levels[index], qubits=tuple(reversed(qubits)), n_ph=n_ph)

    def labels(self):
        for aux in self.aux_levels:
            for qs in product(QUBIT_LEVELS, repeat=self.n_qubits):
                for p in range(self.n_photon):
                    yield BasisLabel(aux=aux, qubits=qs, n_ph=p)

    # -- elementary operators ---------------------------------------------

    def _kron(self, aux_op, qubit_ops, photon_op):
        out = aux_op
        for q_op in qubit_ops:
            out = np.kron(out, q_op)
        return np.kron(out, photon_op)

    def identity(self) -> "OperatorRep":
        return OperatorRep(np.eye(self.dim, dtype=complex), self, "identity")

    def annihilator(self) -> "OperatorRep":
        """Cavity annihilation operator a on the full space."""
        a = np.diag(np.sqrt(np.arange(1, self.n_photon, dtype=float)), k=1).astype(complex)
        eye_q = [np.eye(4)] * self.n_qubits
        return OperatorRep(self._kron(np.eye(self.n_aux), eye_q, a), self, "a")

    def aux_transition(self, upper: str, lower: str) -> "OperatorRep":
        """|upper><lower| on the auxiliary atom, identity elsewhere."""
        op = np.zeros((self.n_aux, self.n_aux), dtype=complex)
        op[self.aux_levels.index(upper), self.aux_levels.index(lower)] = 1.0
        eye_q = [np.eye(4)] * self.n_qubits
        return OperatorRep(self._kron(op, eye_q, np.eye(self.n_photon)), self,
                           f"aux_{upper}{lower}")

    def qubit_transition(self, k: int, upper: str, lower: str) -> "OperatorRep":
        """|upper><lower| on register atom k, identity elsewhere."""
        if not 0 <= k < self.n_qubits:
            raise IndexError(f"register atom {k} out of range")
        op = np.zeros((4, 4), dtype=complex)
        op[QUBIT_LEVELS.index(upper), QUBIT_LEVELS.index(lower)] = 1.0
        qubit_ops = [op if j == k else np.eye(4) for j in range(self.n_qubits)]
        return OperatorRep(self._kron(np.eye(self.n_aux), qubit_ops,
                                      np.eye(self.n_photon)), self,
                           f"q{k}_{upper}{lower}")

    # -- projectors --------------------------------------------------------

    def projector_sector(self, n: int) -> "OperatorRep":
        """Projector onto register states with exactly n atoms in "1".

        Only computational configurations (every atom in "0" or "1") are
        included, so the sum over n = 0..N is the projector onto the
        computational register subspace (identity on auxiliary and cavity).
        """
        if not 0 <= n <= self.n_qubits:
            raise ValueError(f"sector {n} outside [0, {self.n_qubits}]")
        diag = np.zeros(self.dim)
        for i, lab in enumerate(self.labels()):
            if all(q in ("0", "1") for q in lab.qubits) and lab.qubits.count("1") == n:
                diag[i] = 1.0
        return OperatorRep(np.diag(diag).astype(complex), self, f"P_{n}")

    def coupled_count_projector(self, n: int) -> "OperatorRep":
        """Projector onto states with n register atoms outside "0".

        Atoms in "1", "e" or "o" all count: this number is conserved by the
        full model (Hamiltonian and every jump operator), unlike the
        computational sector count.
        """
        diag = np.zeros(self.dim)
        for i, lab in enumerate(self.labels()):
            if sum(q != "0" for q in lab.qubits) == n:
                diag[i] = 1.0
        return OperatorRep(np.diag(diag).astype(complex), self, f"Q_{n}")

    def ground_state_index(self, qubits, aux: str = "g") -> int:
        return self.index(BasisLabel(aux=aux, qubits=tuple(qubits), n_ph=0))


@dataclass(frozen=True)
class OperatorRep:
    """Dense operator together with the space it lives on and a channel tag."""

    matrix: np.ndarray
    space: ProductSpace
    name: str

    def dagger(self) -> np.ndarray:
        return self.matrix.conj().T


def lindblad_set(params: SystemParams, space: ProductSpace | None = None) -> list:
    """Collapse operators of the model, tagged by channel.

    cavity : L_0 = sqrt(kappa) a
    herald_g : L_g = sqrt(gamma_g) |g><E|  (direct drive) or |g><E2| (two photon)
    herald_f : L_f = sqrt(gamma_f) |f><E|
    qubit_k : L_k = sqrt(gamma) |o>_k<e|, one per register atom
    """
    if space is None:
        space = ProductSpace.for_params(params)
    ops = [OperatorRep(np.sqrt(params.kappa) * space.annihilator().matrix, space,
                       "cavity")]
    if params.gamma_g > 0:
        upper = "E2" if params.scheme is Scheme.TWO_PHOTON else "E"
        ops.append(OperatorRep(
            np.sqrt(params.gamma_g) * space.aux_transition("g", upper).matrix,
            space, "herald_g"))
    if params.gamma_f > 0:
        ops.append(OperatorRep(
            np.sqrt(params.gamma_f) * space.aux_transition("f", "E").matrix,
            space, "herald_f"))
    for k in range(params.n_qubits):
        ops.append(OperatorRep(space.qubit_transition(k, "o", "e").matrix, space,
                               f"qubit_{k}"))
    return ops
