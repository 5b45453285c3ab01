"""Wire cutting: fragment extraction, subexperiment expansion, reconstruction.

A cut severs one wire at one gate-list position.  Everything at or after
that position on the wire moves to a fresh wire, the circuit falls apart
into connected components (fragments), and the identity channel across
each cut is resolved tomographically: the upstream side is measured in the
X/Y/Z bases, the downstream side is prepared in |0>, |1>, |+>, |+i>, and
the uncut distribution is recovered as a signed combination of the
subexperiment results.

The per-cut expansion weights are not hard-coded: they are derived at
import time by solving ``P = sum_s w_s |s><s|`` for each Pauli ``P`` over
the four preparation states, which is the operator identity the whole
scheme rests on.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .circuits import Circuit, Gate, dump_text
from .errors import (
    IncompleteResultsError,
    InvalidArgumentError,
    InvalidCutError,
    NumericError,
)
from .simulator import Distribution

__all__ = [
    "CutPoint",
    "CutPlan",
    "Fragment",
    "Subexperiment",
    "cut",
    "expand",
    "reconstruct",
    "chain_cut_plan",
    "subexperiment_manifest",
    "PREP_STATES",
    "MEAS_BASES",
]

PREP_STATES = ("0", "1", "+", "+i")
MEAS_BASES = ("X", "Y", "Z")

_PREP_GATES = {
    "0": (),
    "1": ("X",),
    "+": ("H",),
    "+i": ("H", "S"),
}
_BASIS_CHANGE = {
    "Z": (),
    "X": ("H",),
    "Y": ("SDG", "H"),
}


def _prep_weights() -> dict[str, tuple[tuple[str, float], ...]]:
    """Solve P = sum_s w_s |s><s| over the preparation states, per Pauli."""
    kets = {
        "0": np.array([1.0, 0.0], dtype=complex),
        "1": np.array([0.0, 1.0], dtype=complex),
        "+": np.array([1.0, 1.0], dtype=complex) / np.sqrt(2),
        "+i": np.array([1.0, 1.0j], dtype=complex) / np.sqrt(2),
    }
    paulis = {
        "I": np.eye(2, dtype=complex),
        "X": np.array([[0, 1], [1, 0]], dtype=complex),
        "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
        "Z": np.diag([1.0, -1.0]).astype(complex),
    }
    basis = np.column_stack(
        [np.outer(kets[s], kets[s].conj()).ravel() for s in PREP_STATES]
    )
    table = {}
    for name, mat in paulis.items():
        w, *_ = np.linalg.lstsq(basis, mat.ravel(), rcond=None)
        if np.abs(w.imag).max() > 1e-12:
            raise NumericError("preparation decomposition should be real")
        table[name] = tuple(
            (s, float(round(val, 12)))
            for s, val in zip(PREP_STATES, w.real)
            if abs(val) > 1e-12
        )
    return table


PREP_DECOMPOSITION = _prep_weights()


@dataclass(frozen=True)
class CutPoint:
    """Cut at ``position`` in the gate list on ``wire``: gates at or after
    the position that touch the wire are downstream of the cut."""

    position: int
    wire: int


@dataclass
class CutPlan:
    """Where to cut.  ``cut`` fills in the derived fragment assignment."""

    cuts: list[CutPoint]
    gate_fragments: list[int] | None = None
    _decomposition: "_Decomposition | None" = field(default=None, repr=False)

    def __init__(self, cuts: Sequence[CutPoint | tuple[int, int]] = ()):
        self.cuts = [c if isinstance(c, CutPoint) else CutPoint(*c) for c in cuts]
        self.gate_fragments = None
        self._decomposition = None

    @property
    def num_cuts(self) -> int:
        return len(self.cuts)


@dataclass(frozen=True)
class Fragment:
    """One connected component of the cut circuit.

    ``cut_inputs`` are local wires fed through a cut (they receive a
    preparation); ``cut_outputs`` are local wires feeding a cut (they are
    measured in a tomography basis).  ``own_outputs`` are the remaining
    wires, whose final measurement produces bits of the original circuit;
    ``own_origins`` maps them to original qubit indices.
    """

    index: int
    circuit: Circuit
    cut_inputs: tuple[int, ...]
    cut_outputs: tuple[int, ...]
    input_cut_ids: tuple[int, ...]
    output_cut_ids: tuple[int, ...]
    own_outputs: tuple[int, ...]
    own_origins: tuple[int, ...]

    @property
    def width(self) -> int:
        return self.circuit.width


@dataclass(frozen=True)
class Subexperiment:
    """A fragment with concrete preparation and measurement choices."""

    fragment_index: int
    preparations: tuple[str, ...]
    bases: tuple[str, ...]
    circuit: Circuit
    key: str


@dataclass(frozen=True)
class _Decomposition:
    original_width: int
    fragments: tuple[Fragment, ...]
    num_cuts: int


def _union_find_components(num_wires: int, gate_wires: list[tuple[int, ...]]) -> list[int]:
    parent = list(range(num_wires))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for wires in gate_wires:
        for w in wires[1:]:
            ra, rb = find(wires[0]), find(w)
            if ra != rb:
                parent[rb] = ra
    return [find(w) for w in range(num_wires)]


def cut(c: Circuit, plan: CutPlan) -> list[Fragment]:
    """Split ``c`` according to ``plan``; annotates the plan for reconstruction.

    MEASURE markers are dropped (fragments implicitly measure every wire).
    Raises ``InvalidCutError`` for out-of-range cuts, duplicate cuts, or a
    cut set whose fragment dependency graph is cyclic.
    """
    gates = [g for g in c.gates if g.kind != "MEASURE"]
    for point in plan.cuts:
        if not 0 <= point.position <= len(gates):
            raise InvalidCutError(f"cut position {point.position} out of range")
        if not 0 <= point.wire < c.width:
            raise InvalidCutError(f"cut wire {point.wire} out of range")
    if len({(p.position, p.wire) for p in plan.cuts}) != len(plan.cuts):
        raise InvalidCutError("duplicate cut point")

    ordered = sorted(plan.cuts, key=lambda p: (p.position, p.wire))
    wire_of = list(range(c.width))
    next_wire = c.width
    # cut id -> (upstream wire, downstream wire)
    edges: list[tuple[int, int]] = []
    mapped: list[tuple[Gate, tuple[int, ...]]] = []
    cursor = 0
    for pos in range(len(gates) + 1):
        while cursor < len(ordered) and ordered[cursor].position == pos:
            w = ordered[cursor].wire
            edges.append((wire_of[w], next_wire))
            wire_of[w] = next_wire
            next_wire += 1
            cursor += 1
        if pos < len(gates):
            g = gates[pos]
            mapped.append((g, tuple(wire_of[q] for q in g.qubits)))

    num_wires = next_wire
    roots = _union_find_components(num_wires, [wires for _, wires in mapped])
    root_order = sorted(set(roots), key=lambda r: min(w for w in range(num_wires) if roots[w] == r))
    frag_of_wire = [root_order.index(roots[w]) for w in range(num_wires)]

    from_wires = {fr for fr, _ in edges}
    frag_edges = {(frag_of_wire[fr], frag_of_wire[to]) for fr, to in edges}
    _check_acyclic(len(root_order), frag_edges)

    fragments: list[Fragment] = []
    for idx in range(len(root_order)):
        wires = sorted(w for w in range(num_wires) if frag_of_wire[w] == idx)
        local = {w: i for i, w in enumerate(wires)}
        frag_gates = tuple(
            Gate(g.kind, tuple(local[w] for w in ws), angle=g.angle, param=g.param)
            for g, ws in mapped
            if frag_of_wire[ws[0]] == idx
        )
        cut_inputs, input_ids, cut_outputs, output_ids = [], [], [], []
        for cut_id, (fr, to) in enumerate(edges):
            if fr in local:
                cut_outputs.append(local[fr])
                output_ids.append(cut_id)
            if to in local:
                cut_inputs.append(local[to])
                input_ids.append(cut_id)
        own = [local[w] for w in wires if w not in from_wires]
        origins = []
        for w in wires:
            if w not in from_wires:
                (q,) = [q for q in range(c.width) if wire_of[q] == w]
                origins.append(q)
        fragments.append(
            Fragment(
                index=idx,
                circuit=Circuit(len(wires), frag_gates),
                cut_inputs=tuple(cut_inputs),
                cut_outputs=tuple(cut_outputs),
                input_cut_ids=tuple(input_ids),
                output_cut_ids=tuple(output_ids),
                own_outputs=tuple(own),
                own_origins=tuple(origins),
            )
        )

    total = sum(f.width for f in fragments)
    assert total == c.width + len(plan.cuts), "qubit accounting broken"

    plan.gate_fragments = [frag_of_wire[ws[0]] for _, ws in mapped]
    plan._decomposition = _Decomposition(c.width, tuple(fragments), len(plan.cuts))
    return fragments


def _check_acyclic(n: int, edges: set[tuple[int, int]]) -> None:
    for a, b in edges:
        if a == b:
            raise InvalidCutError("cut does not separate the circuit (self-feeding fragment)")
    adj: dict[int, list[int]] = {i: [] for i in range(n)}
    for a, b in edges:
        adj[a].append(b)
    state = [0] * n  # 0 unvisited, 1 on stack, 2 done

    def visit(v: int) -> None:
        state[v] = 1
        for w in adj[v]:
            if state[w] == 1:
                raise InvalidCutError("cyclic fragment dependency")
            if state[w] == 0:
                visit(w)
        state[v] = 2

    for v in range(n):
        if state[v] == 0:
            visit(v)


def _subexperiment(frag: Fragment, preps: tuple[str, ...], bases: tuple[str, ...]) -> Subexperiment:
    gates: list[Gate] = []
    for local, state in zip(frag.cut_inputs, preps):
        gates.extend(Gate(kind, (local,)) for kind in _PREP_GATES[state])
    gates.extend(frag.circuit.gates)
    for local, basis in zip(frag.cut_outputs, bases):
        gates.extend(Gate(kind, (local,)) for kind in _BASIS_CHANGE[basis])
    key = "f{}|prep={}|meas={}".format(
        frag.index, ",".join(preps) or "-", ",".join(bases) or "-"
    )
    return Subexperiment(
        fragment_index=frag.index,
        preparations=preps,
        bases=bases,
        circuit=Circuit(frag.width, tuple(gates), frag.circuit.params),
        key=key,
    )


def expand(frags: Sequence[Fragment]) -> list[Subexperiment]:
    """All (preparation, measurement-basis) variants, 4^in * 3^out each."""
    out = []
    for frag in frags:
        for preps in itertools.product(PREP_STATES, repeat=len(frag.cut_inputs)):
            for bases in itertools.product(MEAS_BASES, repeat=len(frag.cut_outputs)):
                out.append(_subexperiment(frag, preps, bases))
    return out


def _weighted_marginal(
    vec: np.ndarray, width: int, weights: dict[int, tuple[float, float]]
) -> np.ndarray:
    """Contract the given local wires with (w0, w1); keep the rest.

    Result is little-endian over the remaining wires in ascending order.
    """
    t = vec.reshape([2] * width)
    # ascending local = descending axis, so remaining axis numbers stay valid
    for local in sorted(weights):
        axis = width - 1 - local
        t = np.tensordot(t, np.asarray(weights[local]), axes=([axis], [0]))
    return t.reshape(-1)


def reconstruct(results: Mapping[str, Distribution], plan: CutPlan) -> Distribution:
    """Recombine subexperiment distributions into the uncut distribution.

    ``results`` maps subexperiment keys to distributions; every key from
    ``expand(cut(...))`` must be present and all on the same shot setting.
    Finite-shot quasi-probabilities are clipped at zero and renormalised.
    """
    decomp = plan._decomposition
    if decomp is None:
        raise InvalidArgumentError("plan has not been resolved; call cut() first")
    subexps = expand(decomp.fragments)
    missing = [s.key for s in subexps if s.key not in results]
    if missing:
        raise IncompleteResultsError(f"missing results for {missing[:3]} (+{max(0, len(missing)-3)} more)")
    shot_settings = {results[s.key].shots for s in subexps}
    if len(shot_settings) > 1:
        raise InvalidArgumentError(f"mixed shot settings across subexperiments: {shot_settings}")
    probs = {s.key: results[s.key].probabilities() for s in subexps}

    n = decomp.original_width
    k = decomp.num_cuts
    letters = "abcdefghijklmnopqrstuvwxyz"
    full = np.zeros(2**n)
    frag_cache: dict[tuple[int, tuple[str, ...]], np.ndarray] = {}

    def fragment_vector(frag: Fragment, pauli_of_cut: dict[int, str]) -> np.ndarray:
        local_paulis = tuple(pauli_of_cut[cid] for cid in frag.input_cut_ids + frag.output_cut_ids)
        cached = frag_cache.get((frag.index, local_paulis))
        if cached is not None:
            return cached
        bases = tuple(
            "Z" if pauli_of_cut[cid] == "I" else pauli_of_cut[cid]
            for cid in frag.output_cut_ids
        )
        meas_weights = {}
        for local, cid in zip(frag.cut_outputs, frag.output_cut_ids):
            meas_weights[local] = (1.0, 1.0) if pauli_of_cut[cid] == "I" else (1.0, -1.0)
        prep_options = [
            PREP_DECOMPOSITION[pauli_of_cut[cid]] for cid in frag.input_cut_ids
        ]
        acc = np.zeros(2 ** len(frag.own_outputs))
        for combo in itertools.product(*prep_options):
            weight = 1.0
            preps = []
            for state, w in combo:
                weight *= w
                preps.append(state)
            key = "f{}|prep={}|meas={}".format(
                frag.index, ",".join(preps) or "-", ",".join(bases) or "-"
            )
            acc = acc + weight * _weighted_marginal(probs[key], frag.width, meas_weights)
        frag_cache[(frag.index, local_paulis)] = acc
        return acc

    out_sub = "".join(letters[q] for q in reversed(range(n)))
    for assignment in itertools.product("IXYZ", repeat=k):
        pauli_of_cut = dict(enumerate(assignment))
        coeff = 0.5**k
        operands, subs = [], []
        for frag in decomp.fragments:
            vec = fragment_vector(frag, pauli_of_cut)
            m = len(frag.own_outputs)
            if m == 0:
                coeff *= float(vec[0])
                continue
            # axis j of the reshaped vector belongs to own output m-1-j
            sub = "".join(letters[frag.own_origins[m - 1 - j]] for j in range(m))
            operands.append(vec.reshape([2] * m))
            subs.append(sub)
        if operands:
            term = np.einsum(",".join(subs) + "->" + out_sub, *operands).reshape(-1)
        else:
            term = np.ones(1)
        full += coeff * term

    full = np.clip(full, 0.0, None)
    total = full.sum()
    if total <= 0:
        raise NumericError("reconstruction produced an empty distribution")
    return Distribution(n, full / total, shots=None)


def chain_cut_plan(c: Circuit, n: int) -> CutPlan:
    """The single mid-chain cut for a one-repetition chain-entangled ansatz.

    For ``n`` qubits this severs wire ``(n-1)//2`` between its two CNOTs,
    producing an upstream fragment of ``ceil((n+1)/2)`` qubits and a
    downstream fragment of ``floor((n+1)/2)`` qubits (4 + 3 for n = 6).
    """
    q = (n - 1) // 2
    position = 2 * n - 1 - q
    if position > len(c.gates):
        raise InvalidArgumentError("circuit too short for the standard chain cut")
    return CutPlan([CutPoint(position, q)])


def subexperiment_manifest(subexps: Sequence[Subexperiment]) -> str:
    """JSON records {key, fragment_id, prep, basis, circuit_text}."""
    records = [
        {
            "key": s.key,
            "fragment_id": s.fragment_index,
            "prep": list(s.preparations),
            "basis": list(s.bases),
            "circuit_text": dump_text(s.circuit),
        }
        for s in subexps
    ]
    return json.dumps(records, indent=2, sort_keys=True)
