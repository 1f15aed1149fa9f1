"""Quaternary BP decoding of CSS LDPC codes with a trainable feedback GNN.

The decoder alternates flooding BP4 blocks with a lightweight graph neural
network that turns a failed block's posterior and the observed syndrome into
refined channel priors for the next block.  The package also ships the
classical retry baselines (random perturbation, enhanced feedback), a
Monte-Carlo harness, and end-to-end gradient training of the GNN through an
unrolled BP block.
"""

from .bp4 import BpConfig, BpOutcome, boxplus, hard_decision, init_priors, run, to_scalar_message
from .channel import ChannelConfig, Rng, sample_depolarizing, substream, syndrome
from .css import (
    CssCode,
    CssValidationError,
    PauliError,
    Syndrome,
    hypergraph_product,
    logical_error_check,
    new_css,
)
from .gnn import GnnWeights, MlpParams, gnn_forward, init_weights, load_weights, save_weights
from .sim import Schedule, SimConfig, monte_carlo, sandwich_decode

__version__ = "0.1.0"

__all__ = [
    "BpConfig",
    "BpOutcome",
    "ChannelConfig",
    "CssCode",
    "CssValidationError",
    "GnnWeights",
    "MlpParams",
    "PauliError",
    "Rng",
    "Schedule",
    "SimConfig",
    "Syndrome",
    "boxplus",
    "gnn_forward",
    "hard_decision",
    "hypergraph_product",
    "init_priors",
    "init_weights",
    "load_weights",
    "logical_error_check",
    "monte_carlo",
    "new_css",
    "run",
    "sample_depolarizing",
    "sandwich_decode",
    "save_weights",
    "substream",
    "syndrome",
    "to_scalar_message",
]
