"""Coherent information of Pauli channels on symmetric-subspace inputs."""

from .basis import SpanningBasis, choose_spanning_states, dicke_overlap
from .channel import ChannelFamily, PauliChannel, choi, family_channel, hashing_ci, kraus_operators
from .coherent_info import (
    SymmetricInput,
    block_decomposition,
    evaluate_ci,
    evaluate_ci_extended,
    precompute,
    repetition_input,
)
from .entropy import entropy_bits, project_to_simplex
from .optimizer import OptimizerConfig, ThresholdRecord, maximize_ci, spaced_dicke_alpha, spaced_dicke_input, threshold_search
from .rep_core import enumerate_partitions, irrep_q2, specht_dim, weyl_dim

__version__ = "0.1.0"

__all__ = [
    "ChannelFamily",
    "OptimizerConfig",
    "PauliChannel",
    "SpanningBasis",
    "SymmetricInput",
    "ThresholdRecord",
    "block_decomposition",
    "choi",
    "choose_spanning_states",
    "dicke_overlap",
    "entropy_bits",
    "enumerate_partitions",
    "evaluate_ci",
    "evaluate_ci_extended",
    "family_channel",
    "hashing_ci",
    "irrep_q2",
    "kraus_operators",
    "maximize_ci",
    "precompute",
    "project_to_simplex",
    "repetition_input",
    "spaced_dicke_alpha",
    "spaced_dicke_input",
    "specht_dim",
    "threshold_search",
    "weyl_dim",
]
