"""Scenario document ingestion.

Documents are JSON. The structure is validated by the pydantic schemas in
``hkdelay.schemas`` (unknown keys rejected), then every model invariant is
enforced while the model objects are built.
"""

import copy
import json
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from hkdelay.exceptions import ScenarioError
from hkdelay.model import (
    ConstantFunction,
    ConstantInfluence,
    ConstantProfile,
    DelaySpec,
    GaussianKernel,
    InfluenceSpec,
    InitialHistory,
    PiecewiseLinearFunction,
    PolynomialFunction,
    PolynomialProfile,
    RationalKernel,
    SampledProfile,
    Scenario,
    SineInfluence,
    SinusoidalFunction,
    SolverParams,
    influence_from_family
)
from hkdelay.schemas import (
    ConstantFunctionSchema,
    ConstantInfluenceSchema,
    ConstantProfileSchema,
    GaussianInfluenceSchema,
    PiecewiseLinearFunctionSchema,
    PointwiseDelaySchema,
    PolynomialFunctionSchema,
    PolynomialProfileSchema,
    RationalInfluenceSchema,
    ScenarioDocument,
    SinusoidalFunctionSchema,
    SinusoidalInfluenceSchema
)
from hkdelay.settings import AppConfig
from hkdelay.types import DelayKind, SweepParameter

__all__ = (
    'resolve_scenario',
    'load_document',
    'build_scenario',
    'parse_scenario',
    'set_parameter'
)

# Document paths behind the named sweep parameters
_SWEEP_PATHS = {
    SweepParameter.TAU_BAR: 'tau_bar',
    SweepParameter.HORIZON: 'horizon',
    SweepParameter.STEP: 'solver.step',
    SweepParameter.INFLUENCE_VALUE: 'influence.value'
}


def resolve_scenario(name: str | Path) -> Path:
    """Returns the path of a scenario file.

    Existing paths are returned as they are; bare names are looked up in the
    golden scenario directory (``HKDELAY_SEED_DIR``).

    :raises ScenarioError: If no such scenario exists.
    """
    path = Path(name)
    if path.is_file():
        return path

    # Re-read so that HKDELAY_SEED_DIR changes after import are honoured
    seed_dir = AppConfig().seed_dir
    for candidate in (seed_dir / path, seed_dir / f'{path}.json'):
        if candidate.is_file():
            return candidate

    raise ScenarioError(f'Scenario {name} not found (looked in {seed_dir}).')


def load_document(text: str) -> dict[str, Any]:
    """Decodes a scenario document.

    :raises ScenarioError: With the line of the syntax error.
    """
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(
            f'Scenario document line {e.lineno}, column {e.colno}: {e.msg}.'
        ) from e

    if not isinstance(document, dict):
        raise ScenarioError('Scenario document must be an object.')

    return document


def set_parameter(
        document: dict[str, Any],
        parameter: str,
        value: float
) -> dict[str, Any]:
    """Copy of ``document`` with the number at ``parameter`` replaced.

    ``parameter`` is a named sweep parameter or a dotted path.

    :raises ScenarioError: If the path does not lead to a number.
    """
    try:
        path = _SWEEP_PATHS[SweepParameter(parameter)]
    except ValueError:
        path = parameter

    updated = copy.deepcopy(document)
    *parents, leaf = path.split('.')
    node: Any = updated

    try:
        for key in parents:
            node = node[int(key)] if isinstance(node, list) else node.get(key)
            if not isinstance(node, (dict, list)):
                raise KeyError(key)

        if isinstance(node, list):
            leaf = int(leaf)
            current = node[leaf]
        else:
            current = node.get(leaf)
    except (KeyError, IndexError, ValueError):
        raise ScenarioError(f'Sweep path {path} does not exist.') from None

    if isinstance(current, bool) or not isinstance(current, (int, float)):
        raise ScenarioError(f'Sweep path {path} does not hold a number.')

    node[leaf] = value
    return updated


def _time_function(schema):
    match schema:
        case ConstantFunctionSchema():
            return ConstantFunction(schema.value)
        case SinusoidalFunctionSchema():
            return SinusoidalFunction(
                offset=schema.offset,
                amplitude=schema.amplitude,
                frequency=schema.frequency,
                phase=schema.phase
            )
        case PiecewiseLinearFunctionSchema():
            return PiecewiseLinearFunction(
                tuple(schema.nodes),
                tuple(schema.values)
            )
        case PolynomialFunctionSchema():
            return PolynomialFunction(tuple(schema.coefficients))


def _profile(schema):
    match schema:
        case ConstantProfileSchema():
            return ConstantProfile(tuple(schema.value))
        case PolynomialProfileSchema():
            return PolynomialProfile(
                tuple(tuple(c) for c in schema.coefficients)
            )
        case _:
            return SampledProfile(
                tuple(schema.nodes),
                tuple(tuple(v) for v in schema.values)
            )


def _influence(schema, dimension: int) -> InfluenceSpec:
    match schema:
        case ConstantInfluenceSchema():
            family = ConstantInfluence(schema.value)
        case SinusoidalInfluenceSchema():
            if schema.axis >= dimension:
                raise ScenarioError(
                    f'Sinusoidal influence axis {schema.axis} does not exist '
                    f'in dimension {dimension}.'
                )
            family = SineInfluence(schema.offset, schema.amplitude, schema.axis)
        case RationalInfluenceSchema():
            family = RationalKernel(schema.amplitude, schema.scale)
        case GaussianInfluenceSchema():
            family = GaussianKernel(schema.amplitude, schema.width)

    return influence_from_family(
        family,
        K=schema.K,
        psi0_override=schema.psi0_override
    )


def build_scenario(document: ScenarioDocument) -> Scenario:
    """Builds and validates the model objects of a document.

    :raises ScenarioError: Naming the violated invariant.
    """
    if isinstance(document.delay, PointwiseDelaySchema):
        delay = DelaySpec(
            kind=DelayKind.POINTWISE,
            tau_bar=document.tau_bar,
            tau=_time_function(document.delay.tau)
        )
    else:
        delay = DelaySpec(
            kind=DelayKind.DISTRIBUTED,
            tau_bar=document.tau_bar,
            tau1=_time_function(document.delay.tau1),
            tau2=_time_function(document.delay.tau2),
            alpha=_time_function(document.delay.alpha)
        )

    solver = SolverParams(
        step=document.solver.step,
        **document.solver.model_dump(exclude={'step'}, exclude_none=True)
    )

    return Scenario(
        agent_count=document.agent_count,
        dimension=document.dimension,
        horizon=document.horizon,
        delay=delay,
        influence=_influence(document.influence, document.dimension),
        history=InitialHistory(
            tau_bar=document.tau_bar,
            profiles=tuple(_profile(p) for p in document.history)
        ),
        solver=solver
    )


def parse_scenario(
        text: str | dict[str, Any],
        *,
        step: float | None = None,
        horizon: float | None = None
) -> Scenario:
    """Parses and validates a scenario document.

    :param text: JSON text or an already decoded document.
    :type text: str | dict[str, Any]
    :param step: Overrides the solver step.
    :type step: float | None
    :param horizon: Overrides the horizon.
    :type horizon: float | None
    :return: Fully validated scenario.
    :rtype: Scenario
    :raises ScenarioError: On syntax errors (with line), schema errors (with
        field) and invariant violations.
    """
    document = load_document(text) if isinstance(text, str) else text

    if step is not None:
        document = set_parameter(document, 'step', step)
    if horizon is not None:
        document = set_parameter(document, 'horizon', horizon)

    try:
        parsed = ScenarioDocument.model_validate(document)
    except ValidationError as e:
        problems = '; '.join(
            f'{".".join(str(p) for p in error["loc"]) or "document"}: '
            f'{error["msg"]}'
            for error in e.errors()
        )
        raise ScenarioError(f'Invalid scenario document: {problems}') from e

    return build_scenario(parsed)
