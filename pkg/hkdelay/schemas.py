from pathlib import Path
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from hkdelay.types import CheckStatus, CheckStatusesLiteral, DelayKind

__all__ = (
    'ConstantFunctionSchema',
    'SinusoidalFunctionSchema',
    'PiecewiseLinearFunctionSchema',
    'PolynomialFunctionSchema',
    'TimeFunctionSchema',
    'ConstantProfileSchema',
    'PolynomialProfileSchema',
    'SampledProfileSchema',
    'HistoryProfileSchema',
    'ConstantInfluenceSchema',
    'SinusoidalInfluenceSchema',
    'RationalInfluenceSchema',
    'GaussianInfluenceSchema',
    'InfluenceSchema',
    'PointwiseDelaySchema',
    'DistributedDelaySchema',
    'DelaySchema',
    'SolverSchema',
    'ScenarioDocument',
    'CheckRecord',
    'ConsensusCertificate',
    'RunConfig',
    'MeanFieldConfig',
    'LadderMemberReport',
    'MeanFieldRow',
    'MeanFieldReport',
    'SweepRow'
)


class _BaseSchema(BaseModel):
    model_config = ConfigDict(from_attributes=True, extra='ignore')


class _DocumentSchema(BaseModel):
    """Scenario documents reject unknown keys."""

    model_config = ConfigDict(extra='forbid')


# Time functions (delays and delay kernels)

class ConstantFunctionSchema(_DocumentSchema):
    variant: Literal['constant']
    value: float


class SinusoidalFunctionSchema(_DocumentSchema):
    variant: Literal['sinusoidal']
    offset: float
    amplitude: float
    frequency: float = 1.0
    phase: float = 0.0


class PiecewiseLinearFunctionSchema(_DocumentSchema):
    variant: Literal['piecewise_linear']
    nodes: list[float] = Field(..., min_length=1)
    values: list[float] = Field(..., min_length=1)


class PolynomialFunctionSchema(_DocumentSchema):
    variant: Literal['polynomial']
    coefficients: list[float] = Field(..., min_length=1)


TimeFunctionSchema = Annotated[
    Union[
        ConstantFunctionSchema,
        SinusoidalFunctionSchema,
        PiecewiseLinearFunctionSchema,
        PolynomialFunctionSchema
    ],
    Field(discriminator='variant')
]


# Initial histories

class ConstantProfileSchema(_DocumentSchema):
    variant: Literal['constant']
    value: list[float] = Field(..., min_length=1)


class PolynomialProfileSchema(_DocumentSchema):
    variant: Literal['polynomial']
    coefficients: list[list[float]] = Field(..., min_length=1)


class SampledProfileSchema(_DocumentSchema):
    variant: Literal['sampled']
    nodes: list[float] = Field(..., min_length=2)
    values: list[list[float]] = Field(..., min_length=2)


HistoryProfileSchema = Annotated[
    Union[ConstantProfileSchema, PolynomialProfileSchema, SampledProfileSchema],
    Field(discriminator='variant')
]


# Influence families

class _InfluenceBoundsSchema(_DocumentSchema):
    K: float | None = Field(None, gt=0)
    psi0_override: float | None = Field(None, gt=0)


class ConstantInfluenceSchema(_InfluenceBoundsSchema):
    family: Literal['constant']
    value: float = Field(..., gt=0)


class SinusoidalInfluenceSchema(_InfluenceBoundsSchema):
    family: Literal['sinusoidal']
    offset: float
    amplitude: float
    axis: int = Field(0, ge=0)


class RationalInfluenceSchema(_InfluenceBoundsSchema):
    family: Literal['rational']
    amplitude: float = Field(..., gt=0)
    scale: float = Field(1.0, ge=0)


class GaussianInfluenceSchema(_InfluenceBoundsSchema):
    family: Literal['gaussian']
    amplitude: float = Field(..., gt=0)
    width: float = Field(1.0, gt=0)


InfluenceSchema = Annotated[
    Union[
        ConstantInfluenceSchema,
        SinusoidalInfluenceSchema,
        RationalInfluenceSchema,
        GaussianInfluenceSchema
    ],
    Field(discriminator='family')
]


# Delays

class PointwiseDelaySchema(_DocumentSchema):
    kind: Literal[DelayKind.POINTWISE]
    tau: TimeFunctionSchema


class DistributedDelaySchema(_DocumentSchema):
    kind: Literal[DelayKind.DISTRIBUTED]
    tau1: TimeFunctionSchema
    tau2: TimeFunctionSchema
    alpha: TimeFunctionSchema


DelaySchema = Annotated[
    Union[PointwiseDelaySchema, DistributedDelaySchema],
    Field(discriminator='kind')
]


class SolverSchema(_DocumentSchema):
    step: float = Field(..., gt=0)
    corrector_iterations: int | None = Field(None, ge=0)
    quadrature_points_per_step: int | None = Field(None, ge=1)


class ScenarioDocument(_DocumentSchema):
    """Structured scenario document, validated before any model object is
    built."""

    agent_count: int = Field(..., ge=2)
    dimension: int = Field(..., ge=1)
    horizon: float = Field(..., gt=0)
    tau_bar: float
    delay: DelaySchema
    influence: InfluenceSchema
    history: list[HistoryProfileSchema] = Field(..., min_length=1)
    solver: SolverSchema


# Reports

class CheckRecord(_BaseSchema):
    name: str
    status: CheckStatusesLiteral
    worst_margin: float | None = None
    slack: float = 0.0
    samples: int = Field(0, ge=0)
    note: str | None = None

    @property
    def passed(self) -> bool:
        return self.status != CheckStatus.FAILED


class ConsensusCertificate(_BaseSchema):
    """Proof constants of one trajectory and the outcome of every check."""

    K: float
    M0: float
    psi0: float
    D0: float
    C: float
    C_tilde: float
    gamma: float
    tau_bar: float
    slack: float
    empirical_rate: float | None = None
    checks: list[CheckRecord] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def check(self, name: str) -> CheckRecord:
        """Returns the record of the check called ``name``."""
        for record in self.checks:
            if record.name == name:
                return record

        raise KeyError(name)


class RunConfig(_BaseSchema):
    """Options shared by every subcommand."""

    scenario: Path
    out: Path
    step: float | None = Field(None, gt=0)
    horizon: float | None = Field(None, gt=0)
    jobs: int = Field(1, ge=1)
    emit_plots: bool = False

    # sweep
    parameter: str = 'tau_bar'
    values: list[float] = Field(default_factory=list)

    # meanfield
    ladder: list[int] = Field(default_factory=lambda: [8, 32, 128])
    tau_star: float | None = Field(None, gt=0)
    lipschitz_L: float | None = Field(None, gt=0)


class MeanFieldConfig(_BaseSchema):
    N_ladder: list[int] = Field(default_factory=lambda: [8, 32, 128])
    tau_star: float = Field(..., gt=0)
    lipschitz_L: float | None = Field(None, gt=0)
    sampling: Literal['stratified'] = 'stratified'

    @model_validator(mode='after')
    def _check_ladder(self) -> 'MeanFieldConfig':
        if not self.N_ladder:
            raise ValueError('N_ladder must not be empty.')
        if self.N_ladder[0] < 2:
            raise ValueError('Every ladder member needs at least 2 agents.')
        if any(b <= a for a, b in zip(self.N_ladder, self.N_ladder[1:])):
            raise ValueError('N_ladder must be strictly increasing.')

        return self


class LadderMemberReport(_BaseSchema):
    N: int
    C: float
    C_tilde: float
    gamma: float
    initial_support_diameter: float
    worst_margin: float
    transport: float | None = None
    certified: bool


class MeanFieldRow(_BaseSchema):
    N: int
    t: float
    dX: float
    bound: float
    margin: float


class MeanFieldReport(_BaseSchema):
    members: list[LadderMemberReport]
    rows: list[MeanFieldRow] = Field(default_factory=list)
    constants_identical: bool
    slack: float

    @property
    def passed(self) -> bool:
        return self.constants_identical and all(
            member.certified and member.worst_margin >= -self.slack
            for member in self.members
        )


class SweepRow(_BaseSchema):
    value: float
    C: float | None = None
    C_tilde: float | None = None
    gamma: float | None = None
    empirical_rate: float | None = None
    passed: bool
    error: str | None = None
