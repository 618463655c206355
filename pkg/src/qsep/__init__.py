"""Fully quantum stochastic entropy production for finite-dimensional channels."""
from .channels import (
    CollisionModel,
    Povm,
    QuantumChannel,
    apply,
    adjoint_apply,
    bloch_state,
    channel_rank_flags,
    choi_from_kraus,
    collision_channel,
    complementary_apply,
    compose,
    measurement_channel,
    stinespring,
)
from .classical import ClassicalProcess, classical_average, classical_sigma, embed_as_quantum
from .entropy import (
    avg_def1,
    avg_def2,
    avg_explicit,
    bs_divergence,
    crooks,
    jarzynski,
    locality_decomposition,
    sigma_operator,
    superadditivity,
    umegaki,
    von_neumann_entropy,
)
from .retrodiction import petz_apply, petz_reverse_channel
from .states import q_forward, q_forward_tilde, q_reverse, q_reverse_tilde, q_reverse_variant

__version__ = "0.1.0"
