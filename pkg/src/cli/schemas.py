"""
Run-file schemas. A run file is YAML; every section is optional except
`case`, and omitted values fall back to the chosen preset.
"""
import os
from pathlib import Path
from typing import Any, Mapping, Optional, Union

import yaml
from marshmallow import Schema, ValidationError, fields, validate, validates_schema

from src.domain.entities.case_spec import CaseName
from src.domain.entities.run_config import RunConfig
from src.domain.exceptions import ConfigurationError
from src.domain.services.cases import desk_preset, published_preset, to_plain
from src.domain.value_objects.dissipation import DissipationSpec
from src.domain.value_objects.spline_space import Boundary

CASE_NAMES = [name.value for name in CaseName]
PRESETS = ["desk", "published"]


class DissipationField(fields.Field):
    """'off', a number, or {artificial: coeff | '2h2'}."""

    def _deserialize(self, value, attr, data, **kwargs):
        if value is False:
            # YAML 1.1 reads a bare `off` as false
            value = "off"
        try:
            return DissipationSpec.parse(value)
        except ConfigurationError as e:
            raise ValidationError(str(e))

    def _serialize(self, value, attr, obj, **kwargs):
        return None if value is None else value.to_config()


class GeometrySchema(Schema):
    """Schema for the box and its discretization."""

    cells = fields.List(fields.Integer(validate=validate.Range(min=1)))
    degrees = fields.List(fields.Integer(validate=validate.Range(min=1)))
    boundaries = fields.List(fields.String(validate=validate.OneOf([b.value for b in Boundary])))
    domains = fields.List(fields.List(fields.Float(allow_nan=False), validate=validate.Length(equal=2)))

    @validates_schema
    def validate_lengths(self, data, **kwargs):
        lengths = {len(value) for value in data.values()}
        if len(lengths) > 1:
            raise ValidationError("cells, degrees, boundaries and domains must have the same length")
        for a, b in data.get("domains", []):
            if not b > a:
                raise ValidationError(f"empty interval [{a}, {b}]", "domains")


class PhysicsSchema(Schema):
    """Schema for the equation of state and dissipation."""

    gamma = fields.Float(validate=validate.Range(min=1.0, min_inclusive=False))
    mu = DissipationField()
    eta = DissipationField()


class TimeSchema(Schema):
    dt = fields.Float(validate=validate.Range(min=0.0, min_inclusive=False))
    t_end = fields.Float(validate=validate.Range(min=0.0))


class SolverSchema(Schema):
    """Schema for solver tolerances and iteration limits."""

    linear_tol = fields.Float(validate=validate.Range(min=0.0, min_inclusive=False))
    nonlinear_tol = fields.Float(validate=validate.Range(min=0.0, min_inclusive=False))
    max_nonlinear_iterations = fields.Integer(validate=validate.Range(min=1))
    max_linear_iterations = fields.Integer(validate=validate.Range(min=1))
    invariant_tol = fields.Float(validate=validate.Range(min=0.0, min_inclusive=False))


class OutputSchema(Schema):
    """Schema for the run directory and output cadence."""

    dir = fields.String()
    snapshot_every = fields.Integer(validate=validate.Range(min=1))
    diagnostics_every = fields.Integer(validate=validate.Range(min=1))
    trace_every = fields.Integer(validate=validate.Range(min=1))


class AnalysisSchema(Schema):
    growth_window = fields.List(fields.Float(), validate=validate.Length(equal=2), allow_none=True)


class CaseSchema(Schema):
    """Schema for the case part of a run file."""

    case = fields.String(required=True, validate=validate.OneOf(CASE_NAMES),
                         error_messages={"required": "case is required"})
    preset = fields.String(load_default="desk", validate=validate.OneOf(PRESETS))
    geometry = fields.Nested(GeometrySchema)
    physics = fields.Nested(PhysicsSchema)
    time = fields.Nested(TimeSchema)
    parameters = fields.Dict(keys=fields.String())
    seed = fields.Integer()
    provenance = fields.Dict(keys=fields.String())


class RunConfigSchema(CaseSchema):
    """Schema for a whole run file."""

    solver = fields.Nested(SolverSchema)
    output = fields.Nested(OutputSchema)
    analysis = fields.Nested(AnalysisSchema)


def parse_run_file(path: Union[str, Path]) -> dict:
    """YAML run file as a mapping."""
    path = Path(path)
    try:
        with open(path) as handle:
            data = yaml.safe_load(handle)
    except OSError as e:
        raise ConfigurationError(f"cannot read run file {path}: {str(e)}")
    except yaml.YAMLError as e:
        raise ConfigurationError(f"run file {path} is not valid YAML: {str(e)}")
    if not isinstance(data, dict):
        raise ConfigurationError(f"run file {path} must contain a mapping")
    return data


def build_run_config(data: Mapping[str, Any], output_root: Optional[str] = None,
                     defaults=None) -> RunConfig:
    """Validate a run mapping and resolve it against its preset."""
    try:
        loaded = RunConfigSchema().load(dict(data))
    except ValidationError as err:
        raise ConfigurationError(_summarize(err.messages), errors=err.messages)

    base = desk_preset(loaded["case"]) if loaded["preset"] == "desk" else published_preset(loaded["case"])
    changes = {}
    geometry = loaded.get("geometry", {})
    if geometry:
        if "cells" in geometry:
            changes["cells"] = tuple(geometry["cells"])
        if "degrees" in geometry:
            changes["degrees"] = tuple(geometry["degrees"])
        if "boundaries" in geometry:
            changes["boundaries"] = tuple(Boundary(b) for b in geometry["boundaries"])
        if "domains" in geometry:
            changes["domains"] = tuple(tuple(d) for d in geometry["domains"])
    changes.update(loaded.get("physics", {}))
    changes.update(loaded.get("time", {}))
    parameters = dict(base.parameters)
    parameters.update(loaded.get("parameters", {}))
    if "seed" in loaded:
        parameters["seed"] = loaded["seed"]
    changes["parameters"] = parameters
    overridden = sorted(set(changes) - {"parameters"} | set(loaded.get("parameters", {})))
    changes["provenance"] = {**base.provenance, "overrides": overridden}
    case = base.with_changes(**changes)

    solver = loaded.get("solver", {})
    output = loaded.get("output", {})
    if defaults is not None:
        solver = {
            "linear_tol": defaults.LINEAR_TOL,
            "nonlinear_tol": defaults.NONLINEAR_TOL,
            "max_nonlinear_iterations": defaults.MAX_NONLINEAR_ITERATIONS,
            "max_linear_iterations": defaults.MAX_LINEAR_ITERATIONS,
            "invariant_tol": defaults.INVARIANT_TOL,
            **solver,
        }
    root = output_root or (defaults.OUTPUT_ROOT if defaults is not None else "runs")
    output_dir = Path(output.get("dir") or os.path.join(root, f"{case.name.value}-{loaded['preset']}"))
    window = loaded.get("analysis", {}).get("growth_window") or case.parameter("growth_window")
    return RunConfig(
        case=case,
        output_dir=output_dir,
        snapshot_every=output.get("snapshot_every", 100),
        diagnostics_every=output.get("diagnostics_every", 1),
        trace_every=output.get("trace_every", 1),
        linear_tol=solver.get("linear_tol", 1e-12),
        picard_tol=solver.get("nonlinear_tol", 1e-10),
        picard_max_iters=solver.get("max_nonlinear_iterations", 50),
        max_linear_iterations=solver.get("max_linear_iterations", 2000),
        invariant_tol=solver.get("invariant_tol", 1e-9),
        growth_window=tuple(window) if window else None,
    )


def load_run_config(path, output_root: Optional[str] = None, defaults=None) -> RunConfig:
    return build_run_config(parse_run_file(path), output_root, defaults)


def dump_run_config(config: RunConfig) -> str:
    return yaml.safe_dump(to_plain(config.to_config()), sort_keys=False)


def _flatten(messages, path: str = ""):
    if isinstance(messages, dict):
        for key, value in messages.items():
            yield from _flatten(value, f"{path}.{key}" if path else str(key))
    elif isinstance(messages, list):
        for value in messages:
            if isinstance(value, (dict, list)):
                yield from _flatten(value, path)
            else:
                yield f"{path}: {value}"
    else:
        yield f"{path}: {messages}"


def _summarize(messages) -> str:
    """All schema messages as 'path: message' lines."""
    return "invalid run configuration:\n  " + "\n  ".join(_flatten(messages))
