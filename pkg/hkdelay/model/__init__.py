from .functions import (
    TimeFunction,
    ConstantFunction,
    SinusoidalFunction,
    PiecewiseLinearFunction,
    PolynomialFunction
)
from .history import (
    HistoryProfile,
    ConstantProfile,
    PolynomialProfile,
    SampledProfile,
    BlendedProfile,
    InitialHistory,
    eval_history
)
from .influence import (
    ConstantInfluence,
    SineInfluence,
    RationalKernel,
    GaussianKernel,
    InfluenceSpec,
    influence_from_family,
    compute_psi0
)
from .delay import DelaySpec, eval_delay, quadrature_nodes, compute_h
from .scenario import SolverParams, Scenario

__all__ = (
    'TimeFunction',
    'ConstantFunction',
    'SinusoidalFunction',
    'PiecewiseLinearFunction',
    'PolynomialFunction',
    'HistoryProfile',
    'ConstantProfile',
    'PolynomialProfile',
    'SampledProfile',
    'BlendedProfile',
    'InitialHistory',
    'eval_history',
    'ConstantInfluence',
    'SineInfluence',
    'RationalKernel',
    'GaussianKernel',
    'InfluenceSpec',
    'influence_from_family',
    'compute_psi0',
    'DelaySpec',
    'eval_delay',
    'quadrature_nodes',
    'compute_h',
    'SolverParams',
    'Scenario'
)
