"""Smearing probabilities and the smearing attack on Decision-PLWE."""

from .attack import (
    AttackReport,
    Decision,
    DecisionParams,
    DecisionPlan,
    PlweInstance,
    Sample,
    SampleBatch,
    Verdict,
    gamma1_attack,
    gen_plwe_samples,
    gen_uniform_samples,
    plan_decision,
    residuals,
    smearing_attack,
    smearing_decision,
    success_probs,
)
from .dist import (
    GaussianParams,
    ProbDist,
    cyclic_convolve,
    discrete_gaussian_zq,
    mapped_error_dist,
    pow_substitute,
    sample,
)
from .errors import (
    CapacityError,
    DimensionError,
    DomainError,
    InputExhaustedError,
    NotFoundError,
    PreconditionError,
    SmearingError,
)
from .ring import PolyModF, RingParams, find_roots, mult_order, ring_add, ring_mul, ring_sub, smear_map
from .smear import (
    SmearTable,
    choose_m,
    choose_trials,
    er_approx,
    expected_coupons,
    mc_smear_estimate,
    nonuniform_table,
    p_nonuniform,
    p_nonuniform_small,
    p_uniform,
    simulate_collection_times,
    uniform_grid,
    uniform_table,
)

__version__ = "0.1.0"
