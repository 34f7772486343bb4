"""State amplification versus state masking for state-dependent channels.

Rates are in bits.  Core entry points::

    from ampmask import StateDMC, Policy, sweep_region, SearchConfig
"""

from .binary import BinaryParams, binary_cd, build_binary_cascade, build_binary_channel, sc_region
from .channel import (
    DegradednessReport,
    Policy,
    StateDMC,
    build_joint,
    check_degraded,
    load_channel,
    marginal_channel_mi,
    save_channel,
)
from .errors import AmpMaskError, ConsistencyError, PreconditionError, UsageError, ValidationError
from .gaussian import GaussianParams, UncodedScheme, cd_gaussian, outer_region, uncoded_region
from .info import (
    FiniteDist,
    Frontier,
    JointDist,
    RatePoint,
    binary_convolution,
    binary_entropy,
    conditional_mutual_information,
    convex_hull_envelope,
    entropy,
    mutual_information,
    pareto_frontier,
    ternary_entropy,
)
from .memdef import MemdefParams, build_memdef_channel, memdef_entropies, memdef_regions
from .regions import (
    Bound,
    CdResult,
    SearchConfig,
    cd_reversely_degraded,
    eval_r1,
    eval_r2,
    eval_r3,
    eval_r4,
    eval_r5,
    eval_rout1,
    eval_rout2,
    sweep_region,
    sweep_regions,
)

__all__ = [name for name in dir() if not name.startswith("_")]
