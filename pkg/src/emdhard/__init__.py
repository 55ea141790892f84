"""Exact solvers, reductions and brute-force oracles linking EMD with
orthogonal vectors, hitting set and closest pair problems."""

from .errors import (
    ArithmeticCapacityError,
    CapacityError,
    EmdHardError,
    InconsistencyError,
    InstanceShapeError,
    InvariantViolation,
    ParameterError,
    PromiseViolation,
)
from .exact import (
    LowRankFactorization,
    ReducedExactInstance,
    build_exact_reduction,
    build_lowrank_assignment,
    recover_closest_pair,
    recover_closest_pair_sq,
)
from .gadgets import (
    MomGadget,
    SymmetrizedInstance,
    build_mom_gadget,
    decode_mom,
    decode_symmetrized,
    mom_to_ov,
    negate_product,
    symmetrize,
)
from .kernels import BACKEND
from .matching import (
    CostOracle,
    Matching,
    asymmetric_emd,
    brute_force_min_matching,
    emd,
    max_cardinality_matching,
    min_cost_matching,
    sqemd,
)
from .ov import (
    FindOvConfig,
    FindOvResult,
    HsPhaseTrace,
    find_ov_oracle,
    find_ov_promise,
    find_ov_sampling,
    hitting_set_phased,
    hs_oracle,
    hs_via_promise_findov,
    mom_oracle,
    ov_oracle,
    ov_via_promise_findov,
)
from .squares import SquareDecomposition, decompose_squares, parts_bound
from .vectors import BinaryVector, IntVector, PointSetPair, dot, parity_lift, sq_dist

__version__ = "0.1.0"
