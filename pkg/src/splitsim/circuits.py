"""Gate-level circuit IR and the two ansatz builders used by the workloads.

Circuits are immutable value objects: a qubit count, an ordered gate list
and an ordered tuple of free parameter names.  The gate vocabulary is
deliberately small: RY/CNOT cover the hardware-efficient ansatz, RZ covers
the data-encoding phases, and H/S/SDG/X cover state preparation and basis
changes for cut subexperiments.

Bit/qubit convention (fixed for the whole package): qubit 0 is the least
significant bit.  Outcome strings spell qubit 0 first, so the basis state
with integer index ``b`` has string ``s`` with ``s[i] == (b >> i) & 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InvalidArgumentError

__all__ = [
    "Gate",
    "Circuit",
    "build_real_amplitudes",
    "build_zz_feature_map",
    "bind",
    "bind_map",
    "inverse",
    "depth",
    "dump_text",
]

GATE_KINDS = frozenset({"RY", "RZ", "CNOT", "H", "S", "SDG", "X", "MEASURE"})
_ROTATIONS = frozenset({"RY", "RZ"})


@dataclass(frozen=True)
class Gate:
    """One gate application.

    Rotation gates carry either a bound ``angle`` (radians) or a free
    ``param`` name, never both.  ``MEASURE`` is a terminal marker for an
    all-qubit Z-basis measurement and carries no qubits.
    """

    kind: str
    qubits: tuple[int, ...] = ()
    angle: float | None = None
    param: str | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise InvalidArgumentError(f"unknown gate kind {self.kind!r}")
        if len(set(self.qubits)) != len(self.qubits):
            raise InvalidArgumentError(f"repeated qubit in {self.kind} gate: {self.qubits}")
        if self.kind in _ROTATIONS:
            if (self.angle is None) == (self.param is None):
                raise InvalidArgumentError(
                    f"{self.kind} needs exactly one of angle or param"
                )
        elif self.angle is not None or self.param is not None:
            raise InvalidArgumentError(f"{self.kind} does not take an angle")
        n_expected = {"CNOT": 2, "MEASURE": 0}.get(self.kind, 1)
        if len(self.qubits) != n_expected:
            raise InvalidArgumentError(
                f"{self.kind} acts on {n_expected} qubit(s), got {self.qubits}"
            )

    @property
    def is_bound(self) -> bool:
        return self.param is None


@dataclass(frozen=True)
class Circuit:
    """An ordered gate list over ``width`` qubits.

    ``params`` lists the free parameter names in their positional binding
    order; it is derived from the gates when omitted.
    """

    width: int
    gates: tuple[Gate, ...]
    params: tuple[str, ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.width < 1:
            raise InvalidArgumentError("circuit width must be >= 1")
        self.__dict__["gates"] = tuple(self.gates)
        seen: list[str] = []
        for g in self.gates:
            for q in g.qubits:
                if not 0 <= q < self.width:
                    raise InvalidArgumentError(
                        f"gate {g.kind} addresses qubit {q} outside width {self.width}"
                    )
            if g.param is not None and g.param not in seen:
                seen.append(g.param)
        if self.params is None:
            self.__dict__["params"] = tuple(seen)
        else:
            self.__dict__["params"] = tuple(self.params)
            if set(seen) - set(self.params):
                raise InvalidArgumentError("gate parameters missing from params list")

    @property
    def num_params(self) -> int:
        return len(self.params)

    @property
    def is_bound(self) -> bool:
        return not self.params

    def __str__(self) -> str:
        return dump_text(self)


def build_real_amplitudes(n: int, reps: int) -> Circuit:
    """Hardware-efficient RY ansatz with reverse-linear CNOT entanglement.

    Layout: an RY column on all qubits, then per repetition a CNOT chain
    applied with control ``i`` and target ``i+1`` for ``i`` descending,
    followed by another RY column.  Qubit ``i`` carries the consecutive
    parameters ``theta_{(reps+1)*i+1} .. theta_{(reps+1)*(i+1)}``, one per
    RY column, matching the usual drawing of the template.

    Parameter count is ``n*(reps+1)``; CNOT count is ``(n-1)*reps``.
    """
    if n < 2:
        raise InvalidArgumentError("need at least 2 qubits")
    if reps < 1:
        raise InvalidArgumentError("need at least 1 repetition")
    names = [f"theta_{i + 1}" for i in range(n * (reps + 1))]

    def ry_column(layer: int) -> list[Gate]:
        return [
            Gate("RY", (q,), param=names[(reps + 1) * q + layer]) for q in range(n)
        ]

    gates: list[Gate] = ry_column(0)
    for layer in range(1, reps + 1):
        for ctrl in range(n - 2, -1, -1):
            gates.append(Gate("CNOT", (ctrl, ctrl + 1)))
        gates.extend(ry_column(layer))
    return Circuit(n, tuple(gates), tuple(names))


def build_zz_feature_map(n: int, reps: int, x) -> Circuit:
    """Second-order data-encoding circuit with all-pair ZZ interactions.

    Per repetition: H on every qubit, a single-qubit phase ``2*x[i]`` on
    each qubit, then for every pair ``i < j`` the interaction phase
    ``2*(pi - x[i])*(pi - x[j])`` realised as CNOT(i,j) RZ CNOT(i,j).
    The result is fully bound and deterministic for a given ``x``.
    """
    if reps < 1:
        raise InvalidArgumentError("need at least 1 repetition")
    x = list(x)
    if len(x) != n:
        raise InvalidArgumentError(f"feature vector has {len(x)} entries, circuit width is {n}")
    gates: list[Gate] = []
    for _ in range(reps):
        gates.extend(Gate("H", (q,)) for q in range(n))
        gates.extend(Gate("RZ", (q,), angle=2.0 * x[q]) for q in range(n))
        for i in range(n):
            for j in range(i + 1, n):
                phi = 2.0 * (math.pi - x[i]) * (math.pi - x[j])
                gates.append(Gate("CNOT", (i, j)))
                gates.append(Gate("RZ", (j,), angle=phi))
                gates.append(Gate("CNOT", (i, j)))
    return Circuit(n, tuple(gates), ())


def bind(c: Circuit, theta) -> Circuit:
    """Bind all free parameters positionally; the input is unchanged."""
    theta = list(theta)
    if len(theta) != c.num_params:
        raise InvalidArgumentError(
            f"{len(theta)} values for {c.num_params} free parameters"
        )
    return bind_map(c, dict(zip(c.params, theta)))


def bind_map(c: Circuit, values: dict[str, float]) -> Circuit:
    """Bind parameters by name.  Names absent from ``values`` stay free."""
    unknown = set(values) - set(c.params)
    if unknown:
        raise InvalidArgumentError(f"unknown parameters: {sorted(unknown)}")
    gates = tuple(
        Gate(g.kind, g.qubits, angle=float(values[g.param]))
        if g.param is not None and g.param in values
        else g
        for g in c.gates
    )
    remaining = tuple(p for p in c.params if p not in values)
    return Circuit(c.width, gates, remaining)


_INVERSE_FIXED = {"H": "H", "X": "X", "CNOT": "CNOT", "S": "SDG", "SDG": "S"}


def inverse(c: Circuit) -> Circuit:
    """Adjoint circuit: reversed gate order with each gate inverted."""
    gates: list[Gate] = []
    for g in reversed(c.gates):
        if g.kind == "MEASURE":
            continue
        if g.kind in _ROTATIONS:
            if g.angle is None:
                raise InvalidArgumentError("cannot invert an unbound rotation")
            gates.append(Gate(g.kind, g.qubits, angle=-g.angle))
        else:
            gates.append(Gate(_INVERSE_FIXED[g.kind], g.qubits))
    return Circuit(c.width, tuple(gates), ())


def depth(c: Circuit) -> int:
    """Layered circuit depth (greedy as-soon-as-possible schedule).

    MEASURE markers do not count; readout cost is modelled separately by
    the fleet timing model.
    """
    frontier = [0] * c.width
    for g in c.gates:
        if g.kind == "MEASURE":
            continue
        level = 1 + max(frontier[q] for q in g.qubits)
        for q in g.qubits:
            frontier[q] = level
    return max(frontier, default=0)


def concat(a: Circuit, b: Circuit) -> Circuit:
    """Concatenate two equal-width circuits (``a`` first)."""
    if a.width != b.width:
        raise InvalidArgumentError("width mismatch in concat")
    return Circuit(a.width, a.gates + b.gates, a.params + tuple(p for p in b.params if p not in a.params))


def dump_text(c: Circuit) -> str:
    """One gate per line, e.g. ``RY q0 0.5`` or ``CNOT q1 q2``."""
    lines = [f"# width {c.width}"]
    for g in c.gates:
        parts = [g.kind] + [f"q{q}" for q in g.qubits]
        if g.angle is not None:
            parts.append(repr(g.angle))
        elif g.param is not None:
            parts.append(g.param)
        lines.append(" ".join(parts))
    return "\n".join(lines)
