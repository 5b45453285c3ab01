"""Error mitigation: readout confusion inversion and zero-noise extrapolation.

Resilience levels follow the execution-request convention used throughout
the package: 0 applies nothing, 1 applies measurement error mitigation,
2 applies ZNE via gate folding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import Circuit, Gate, inverse
from .errors import InvalidArgumentError, NumericError
from .observables import PauliObservable
from .simulator import Distribution, NoiseModel, simulate_noisy

__all__ = [
    "RESILIENCE_LEVELS",
    "ReadoutCalibration",
    "ZneSchedule",
    "mitigate_readout",
    "fold_circuit",
    "zne_expectation",
]

RESILIENCE_LEVELS = (0, 1, 2)


@dataclass(frozen=True)
class ReadoutCalibration:
    """Per-qubit confusion matrices used for inversion-based mitigation.

    The simulator knows the true confusion matrices, so calibration is
    exact here; the two calibration circuits per qubit that a measured
    calibration would run are still charged by the fleet timing model.
    """

    matrices: tuple

    def __post_init__(self):
        mats = [np.asarray(m, dtype=float) for m in self.matrices]
        for a in mats:
            if a.shape != (2, 2):
                raise InvalidArgumentError("calibration matrices must be 2x2")
            if not np.allclose(a.sum(axis=0), 1.0, atol=1e-12):
                raise InvalidArgumentError("calibration columns must sum to 1")
            if abs(np.linalg.det(a)) < 1e-9:
                raise NumericError("singular readout calibration matrix")
        object.__setattr__(
            self, "matrices", tuple(tuple(map(tuple, a)) for a in mats)
        )

    @property
    def width(self) -> int:
        return len(self.matrices)

    def as_arrays(self) -> list[np.ndarray]:
        return [np.asarray(m, dtype=float) for m in self.matrices]

    @staticmethod
    def from_noise_model(nm: NoiseModel, width: int) -> "ReadoutCalibration":
        mats = nm.confusion_matrices(width)
        if mats is None:
            mats = [np.eye(2)] * width
        return ReadoutCalibration(tuple(tuple(map(tuple, m)) for m in mats))


def mitigate_readout(d: Distribution, cal: ReadoutCalibration) -> Distribution:
    """Apply the inverse confusion map, clip negatives, renormalise."""
    if cal.width != d.width:
        raise InvalidArgumentError(
            f"calibration covers {cal.width} qubits, distribution has {d.width}"
        )
    probs = d.probabilities()
    tensor = probs.reshape([2] * d.width)
    for q, a in enumerate(cal.as_arrays()):
        inv = np.linalg.inv(a)
        axis = d.width - 1 - q
        tensor = np.tensordot(inv, tensor, axes=([1], [axis]))
        tensor = np.moveaxis(tensor, 0, axis)
    vec = np.clip(tensor.reshape(-1), 0.0, None)
    total = vec.sum()
    if total <= 0:
        raise NumericError("readout mitigation wiped out all probability mass")
    return Distribution(d.width, vec / total, shots=None)


@dataclass(frozen=True)
class ZneSchedule:
    """Noise scale factors realised by gate folding, plus the extrapolation.

    Scale factors must be odd positive integers, strictly increasing and
    starting at 1; extrapolation is a linear least-squares fit to scale 0.
    """

    scales: tuple[int, ...] = (1, 3, 5)

    def __post_init__(self):
        s = tuple(int(v) for v in self.scales)
        if len(s) < 2:
            raise InvalidArgumentError("need at least 2 scale factors")
        if s[0] != 1:
            raise InvalidArgumentError("first scale factor must be 1")
        if any(v % 2 == 0 or v < 1 for v in s):
            raise InvalidArgumentError("scale factors must be odd positive integers")
        if any(b <= a for a, b in zip(s, s[1:])):
            raise InvalidArgumentError("scale factors must be strictly increasing")
        object.__setattr__(self, "scales", s)

    def extrapolate(self, values) -> float:
        slope, intercept = np.polyfit(np.asarray(self.scales, dtype=float), np.asarray(values, dtype=float), 1)
        return float(intercept)

    @property
    def fold_sum(self) -> int:
        return sum(self.scales)


def fold_circuit(c: Circuit, scale: int) -> Circuit:
    """Replace each gate g by g (g^dagger g)^((scale-1)/2), unitarily a no-op."""
    if scale % 2 == 0 or scale < 1:
        raise InvalidArgumentError("fold scale must be an odd positive integer")
    if scale == 1:
        return c
    half = (scale - 1) // 2
    gates: list[Gate] = []
    for g in c.gates:
        if g.kind == "MEASURE":
            gates.append(g)
            continue
        single = Circuit(c.width, (g,))
        inv = inverse(single).gates
        gates.append(g)
        for _ in range(half):
            gates.extend(inv)
            gates.append(g)
    return Circuit(c.width, tuple(gates), c.params)


def zne_expectation(
    c: Circuit,
    obs: PauliObservable,
    nm: NoiseModel,
    sched: ZneSchedule = ZneSchedule(),
) -> float:
    """Noise-amplified expectation series extrapolated back to zero noise."""
    if not c.is_bound:
        raise InvalidArgumentError("circuit must be fully bound")
    values = [obs.expectation(simulate_noisy(fold_circuit(c, s), nm)) for s in sched.scales]
    return sched.extrapolate(values)
