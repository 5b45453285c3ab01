"""splitsim: simulator and benchmark harness for split quantum-classical workloads.

Subpackages cover the gate-level IR (:mod:`splitsim.circuits`), exact and
noisy simulation (:mod:`splitsim.simulator`), wire cutting with classical
reconstruction (:mod:`splitsim.cutting`), readout/ZNE error mitigation
(:mod:`splitsim.mitigation`), the VQE and QSVM workloads (:mod:`splitsim.vqe`,
:mod:`splitsim.qsvm`), a discrete-event fleet model (:mod:`splitsim.fleet`)
and the scenario runner CLI (:mod:`splitsim.cli`).
"""

from .circuits import (
    Circuit,
    Gate,
    bind,
    bind_map,
    build_real_amplitudes,
    build_zz_feature_map,
    depth,
    dump_text,
)
from .cutting import CutPlan, CutPoint, Fragment, Subexperiment, chain_cut_plan, cut, expand, reconstruct
from .observables import IsingChainHamiltonian, PauliObservable
from .simulator import Distribution, NoiseModel, sample, simulate_exact, simulate_noisy

__version__ = "0.1.0"

__all__ = [
    "Circuit",
    "Gate",
    "bind",
    "bind_map",
    "build_real_amplitudes",
    "build_zz_feature_map",
    "depth",
    "dump_text",
    "CutPlan",
    "CutPoint",
    "Fragment",
    "Subexperiment",
    "chain_cut_plan",
    "cut",
    "expand",
    "reconstruct",
    "IsingChainHamiltonian",
    "PauliObservable",
    "Distribution",
    "NoiseModel",
    "sample",
    "simulate_exact",
    "simulate_noisy",
    "__version__",
]
