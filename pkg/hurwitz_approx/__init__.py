__version__ = "0.1.0"

from .config import (
    setup_environment,
    get_config,
    is_initialized,
    get_initialization_info,
)
from .cf_engine import (
    Const,
    Progression,
    HurwitzianDescriptor,
    DescriptorError,
    RationalInterval,
    builtin_descriptor,
    parse_descriptor,
    quadratic_descriptor,
    partial_quotient,
    convergent,
    convergents,
    eval_interval,
    mu,
    mu_limit,
)
from .mod_arith import (
    ModPair,
    PeriodInfo,
    PeriodBudgetExceeded,
    quotient_mod_period,
    convergent_mod_period,
    leaper,
    leaper_mod,
    leaper_period,
    leaper_reflect,
    crt_combine,
)
from .approx import (
    ReducedTarget,
    ReductionError,
    Zero,
    Nonzero,
    ExactValue,
    BoundOnly,
    Unknown,
    reduce,
    is_zero,
    fast_is_zero_exp,
    value,
    coarse_upper_bound,
    closure_targets,
    special_zero_families,
)
from .oracle import lambda_S, liminf_scan, classify_small

# Public API - what users should import
__all__ = [
    'setup_environment',
    'get_config',
    'is_initialized',
    'get_initialization_info',
    'Const',
    'Progression',
    'HurwitzianDescriptor',
    'DescriptorError',
    'RationalInterval',
    'builtin_descriptor',
    'parse_descriptor',
    'quadratic_descriptor',
    'partial_quotient',
    'convergent',
    'convergents',
    'eval_interval',
    'mu',
    'mu_limit',
    'ModPair',
    'PeriodInfo',
    'PeriodBudgetExceeded',
    'quotient_mod_period',
    'convergent_mod_period',
    'leaper',
    'leaper_mod',
    'leaper_period',
    'leaper_reflect',
    'crt_combine',
    'ReducedTarget',
    'ReductionError',
    'Zero',
    'Nonzero',
    'ExactValue',
    'BoundOnly',
    'Unknown',
    'reduce',
    'is_zero',
    'fast_is_zero_exp',
    'value',
    'coarse_upper_bound',
    'closure_targets',
    'special_zero_families',
    'lambda_S',
    'liminf_scan',
    'classify_small',
]
