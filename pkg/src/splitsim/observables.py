"""Weighted Pauli-string observables and the nearest-neighbour ZZ chain."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .simulator import Distribution

__all__ = ["PauliObservable", "IsingChainHamiltonian"]


@dataclass(frozen=True)
class PauliObservable:
    """Sum of weighted Pauli strings.

    Each term is ``(coefficient, label)`` where ``label[q]`` is the Pauli
    letter acting on qubit ``q``.  Expectation values are evaluated from
    Z-basis measurement distributions, so only diagonal terms (letters I
    and Z) can be scored against a :class:`Distribution`.
    """

    num_qubits: int
    terms: tuple[tuple[float, str], ...]

    def __post_init__(self):
        for coeff, label in self.terms:
            if len(label) != self.num_qubits:
                raise InvalidArgumentError(
                    f"Pauli label {label!r} has wrong length for {self.num_qubits} qubits"
                )
            if set(label) - set("IXYZ"):
                raise InvalidArgumentError(f"bad Pauli label {label!r}")

    @property
    def is_diagonal(self) -> bool:
        return all(set(label) <= {"I", "Z"} for _, label in self.terms)

    def eigenvalues(self) -> np.ndarray:
        """Diagonal of the observable over the 2^n basis states."""
        if not self.is_diagonal:
            raise InvalidArgumentError("observable has non-diagonal terms")
        n = self.num_qubits
        idx = np.arange(2**n)
        diag = np.zeros(2**n)
        for coeff, label in self.terms:
            term = np.full(2**n, coeff)
            for q, letter in enumerate(label):
                if letter == "Z":
                    term = term * (1.0 - 2.0 * ((idx >> q) & 1))
            diag += term
        return diag

    def expectation(self, d: Distribution) -> float:
        if d.width != self.num_qubits:
            raise InvalidArgumentError(
                f"distribution over {d.width} bits, observable over {self.num_qubits}"
            )
        return float(self.eigenvalues() @ d.probabilities())


@dataclass(frozen=True)
class IsingChainHamiltonian:
    """H = J * sum_i Z_i Z_{i+1} over an open chain of ``n`` spins."""

    n: int
    coupling: float = 1.0

    def __post_init__(self):
        if self.n < 2:
            raise InvalidArgumentError("chain needs at least 2 spins")

    def to_pauli(self) -> PauliObservable:
        terms = []
        for i in range(self.n - 1):
            label = "".join(
                "Z" if q in (i, i + 1) else "I" for q in range(self.n)
            )
            terms.append((self.coupling, label))
        return PauliObservable(self.n, tuple(terms))

    def energies(self) -> np.ndarray:
        """E(z) for every basis state, vectorised; H is diagonal in Z."""
        idx = np.arange(2**self.n)
        bits = (idx[:, None] >> np.arange(self.n)[None, :]) & 1
        signs = 1.0 - 2.0 * (bits[:, :-1] ^ bits[:, 1:])
        return self.coupling * signs.sum(axis=1)
