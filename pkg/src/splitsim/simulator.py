"""Exact statevector simulation, noisy density-matrix simulation, sampling.

This module is the stand-in for quantum hardware.  Everything is little
endian: basis-state index ``b`` assigns bit ``(b >> q) & 1`` to qubit ``q``,
and outcome strings spell qubit 0 first.

All functions are pure; RNG state is always passed in explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .circuits import Circuit
from .errors import InvalidArgumentError, ResourceLimitError

__all__ = [
    "EXACT_WIDTH_CAP",
    "NOISY_WIDTH_CAP",
    "NoiseModel",
    "Distribution",
    "simulate_exact",
    "simulate_noisy",
    "sample",
    "statevector_probabilities",
    "apply_readout_confusion",
]

EXACT_WIDTH_CAP = 14
NOISY_WIDTH_CAP = 7

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_S = np.diag([1, 1j]).astype(complex)
_SDG = np.diag([1, -1j]).astype(complex)
_CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


def _ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz(phi: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * phi), np.exp(0.5j * phi)])


def _gate_matrix(g) -> np.ndarray:
    if g.kind == "RY":
        return _ry(g.angle)
    if g.kind == "RZ":
        return _rz(g.angle)
    return {"H": _H, "X": _X, "S": _S, "SDG": _SDG, "CNOT": _CNOT}[g.kind]


def _apply_unitary(state: np.ndarray, u: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    """Apply ``u`` on ``qubits`` of a statevector, or batched over columns.

    ``state`` has shape ``(2**n,)`` or ``(2**n, m)``.  Tensor axes are
    ordered so that axis ``n-1-q`` belongs to qubit ``q`` (C-order reshape
    of a little-endian vector).
    """
    k = len(qubits)
    batch = list(state.shape[1:])
    tensor = state.reshape([2] * n + batch)
    axes = [n - 1 - q for q in qubits]
    tensor = np.tensordot(
        u.reshape([2] * (2 * k)), tensor, axes=(list(range(k, 2 * k)), axes)
    )
    # tensordot moves the contracted axes to the front; put them back.
    tensor = np.moveaxis(tensor, list(range(k)), axes)
    return tensor.reshape(state.shape)


def _conjugate_by(rho: np.ndarray, u: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    """rho -> U rho U^dagger for ``u`` acting on ``qubits``."""
    left = _apply_unitary(rho, u, qubits, n)
    return _apply_unitary(left.conj().T, u, qubits, n).conj().T


@dataclass(frozen=True)
class NoiseModel:
    """Parametric gate and readout noise.

    ``depolarizing_1q``/``depolarizing_2q`` give the probability with which
    a gate's qubits are replaced by the maximally mixed state after the
    gate.  ``readout_confusion`` holds per-qubit column-stochastic 2x2
    matrices ``A`` with ``A[i][j] = P(read i | true j)``; a single matrix is
    broadcast to every qubit, ``None`` means ideal readout.
    """

    depolarizing_1q: float = 0.0
    depolarizing_2q: float = 0.0
    readout_confusion: tuple | None = None

    def __post_init__(self):
        for name in ("depolarizing_1q", "depolarizing_2q"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise InvalidArgumentError(f"{name} must be in [0, 1], got {p}")
        if self.readout_confusion is not None:
            mats = np.asarray(self.readout_confusion, dtype=float)
            if mats.ndim == 2:
                mats = mats[None, :, :]
            if mats.ndim != 3 or mats.shape[1:] != (2, 2):
                raise InvalidArgumentError("readout confusion matrices must be 2x2")
            if not np.allclose(mats.sum(axis=1), 1.0, atol=1e-12):
                raise InvalidArgumentError("confusion matrix columns must sum to 1")
            if mats.min() < 0:
                raise InvalidArgumentError("confusion matrix entries must be >= 0")
            frozen = tuple(tuple(tuple(row) for row in m) for m in mats)
            object.__setattr__(self, "readout_confusion", frozen)

    @property
    def is_trivial(self) -> bool:
        return (
            self.depolarizing_1q == 0.0
            and self.depolarizing_2q == 0.0
            and self.readout_confusion is None
        )

    def confusion_matrices(self, width: int) -> list[np.ndarray] | None:
        if self.readout_confusion is None:
            return None
        mats = [np.asarray(m, dtype=float) for m in self.readout_confusion]
        if len(mats) == 1:
            mats = mats * width
        if len(mats) < width:
            raise InvalidArgumentError(
                f"noise model has {len(mats)} confusion matrices for width {width}"
            )
        return mats[:width]


@dataclass(frozen=True)
class Distribution:
    """Measurement outcomes over ``width`` bits.

    Exact mode (``shots is None``) stores probabilities summing to 1;
    shot mode stores integer counts summing to ``shots``.  ``values`` is
    indexed by the little-endian integer outcome.
    """

    width: int
    values: np.ndarray
    shots: int | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (2**self.width,):
            raise InvalidArgumentError(
                f"distribution over {self.width} bits needs {2**self.width} entries"
            )
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def probabilities(self) -> np.ndarray:
        if self.shots is None:
            return self.values
        return self.values / self.shots

    def outcomes(self, include_zeros: bool = False) -> dict[str, float]:
        """Dict view keyed by outcome string (qubit 0 first)."""
        out = {}
        for idx, v in enumerate(self.values):
            if v or include_zeros:
                key = "".join(str((idx >> q) & 1) for q in range(self.width))
                out[key] = float(v)
        return out

    @staticmethod
    def from_outcomes(
        width: int, outcomes: Mapping[str, float], shots: int | None = None
    ) -> "Distribution":
        vals = np.zeros(2**width)
        for key, v in outcomes.items():
            if len(key) != width or set(key) - {"0", "1"}:
                raise InvalidArgumentError(f"bad outcome string {key!r} for width {width}")
            idx = sum((1 << q) for q, ch in enumerate(key) if ch == "1")
            vals[idx] += v
        return Distribution(width, vals, shots)


def statevector_probabilities(state: np.ndarray) -> np.ndarray:
    return np.abs(state) ** 2


def simulate_exact(c: Circuit) -> np.ndarray:
    """Final statevector of a fully bound circuit from the all-zeros state."""
    if not c.is_bound:
        raise InvalidArgumentError(f"circuit has unbound parameters: {c.params}")
    if c.width > EXACT_WIDTH_CAP:
        raise ResourceLimitError(
            f"width {c.width} exceeds exact-simulation cap {EXACT_WIDTH_CAP}"
        )
    state = np.zeros(2**c.width, dtype=complex)
    state[0] = 1.0
    for g in c.gates:
        if g.kind == "MEASURE":
            continue
        state = _apply_unitary(state, _gate_matrix(g), g.qubits, c.width)
    return state


def _depolarize(rho: np.ndarray, qubits: tuple[int, ...], p: float, n: int) -> np.ndarray:
    """Replace ``qubits`` by the maximally mixed state with probability p."""
    if p == 0.0:
        return rho
    k = len(qubits)
    t = rho.reshape([2] * (2 * n))
    row_axes = [n - 1 - q for q in qubits]
    col_axes = [2 * n - 1 - q for q in qubits]
    rest_rows = [a for a in range(n) if a not in row_axes]
    rest_cols = [a for a in range(n, 2 * n) if a not in col_axes]
    perm = row_axes + rest_rows + col_axes + rest_cols
    grouped = np.transpose(t, perm).reshape(
        2**k, 2 ** (n - k), 2**k, 2 ** (n - k)
    )
    traced = np.einsum("iaib->ab", grouped)
    mixed = np.einsum(
        "ij,ab->iajb", np.eye(2**k) / 2**k, traced
    )
    out = (1.0 - p) * grouped + p * mixed
    inv = np.argsort(perm)
    return np.transpose(out.reshape([2] * (2 * n)), inv).reshape(rho.shape)


def apply_readout_confusion(probs: np.ndarray, mats: list[np.ndarray], width: int) -> np.ndarray:
    """Classical post-map p' = (tensor_i A_i) p, one 2x2 per qubit."""
    tensor = probs.reshape([2] * width)
    for q, a in enumerate(mats):
        axis = width - 1 - q
        tensor = np.tensordot(a, tensor, axes=([1], [axis]))
        tensor = np.moveaxis(tensor, 0, axis)
    return tensor.reshape(-1)


def simulate_noisy(c: Circuit, nm: NoiseModel) -> Distribution:
    """Z-basis measurement distribution under gate depolarizing + readout noise.

    Density-matrix evolution; each gate is followed by a depolarizing
    channel on exactly its qubits, and the readout confusion map is applied
    classically to the final diagonal.  Exact probabilities, no sampling.
    """
    if not c.is_bound:
        raise InvalidArgumentError(f"circuit has unbound parameters: {c.params}")
    if c.width > NOISY_WIDTH_CAP:
        raise ResourceLimitError(
            f"width {c.width} exceeds noisy-simulation cap {NOISY_WIDTH_CAP}"
        )
    n = c.width
    dim = 2**n
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    for g in c.gates:
        if g.kind == "MEASURE":
            continue
        rho = _conjugate_by(rho, _gate_matrix(g), g.qubits, n)
        p = nm.depolarizing_2q if len(g.qubits) == 2 else nm.depolarizing_1q
        rho = _depolarize(rho, g.qubits, p, n)
    probs = np.clip(np.real(np.diag(rho)), 0.0, None)
    probs = probs / probs.sum()
    mats = nm.confusion_matrices(n)
    if mats is not None:
        probs = apply_readout_confusion(probs, mats, n)
        probs = np.clip(probs, 0.0, None)
        probs = probs / probs.sum()
    return Distribution(n, probs, shots=None)


def sample(d: Distribution, shots: int, seed) -> Distribution:
    """Multinomial draw from an exact distribution, deterministic per seed.

    ``seed`` may be anything accepted by ``numpy.random.default_rng``,
    including an already-seeded ``Generator``.
    """
    if shots < 1:
        raise InvalidArgumentError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    probs = d.probabilities()
    counts = rng.multinomial(shots, probs / probs.sum())
    return Distribution(d.width, counts.astype(float), shots=shots)
