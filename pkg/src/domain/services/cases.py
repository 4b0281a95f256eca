"""
Initial conditions, published parameter sets and desk-scale presets of the
supported experiments, plus the analytic current-sheet reference.
"""
import logging
import math
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from scipy.special import erf

from src.domain.entities.case_spec import CaseName, CaseSpec
from src.domain.entities.state import State, StepConfig
from src.domain.exceptions import ConfigurationError
from src.domain.services.derham import DeRhamComplex, build_complex
from src.domain.services.projectors import Projectors
from src.domain.value_objects.dissipation import DissipationSpec
from src.domain.value_objects.eos import Eos
from src.domain.value_objects.field import Field, SpaceTag
from src.domain.value_objects.spline_space import Boundary

logger = logging.getLogger(__name__)

PERIODIC, CLAMPED = Boundary.PERIODIC, Boundary.CLAMPED
TWO_PI = 2.0 * math.pi

# Parameter sets as published. Desk presets below downscale resolution,
# horizon or step and keep these values as provenance.
PUBLISHED: Dict[CaseName, Dict[str, Any]] = {
    CaseName.DISPERSION_1D: dict(
        cells=(128,), degrees=(2,), boundaries=(PERIODIC,), domains=((0.0, 10.0),),
        gamma=5.0 / 3.0, dt=3e-2, t_end=18.0,
        mu={"artificial": "2h2"}, eta={"artificial": "2h2"},
        parameters=dict(rho0=1.0, p0=1.0, b0=(1.0, 1.0, 0.0), amplitude=1e-2, seed=1234),
    ),
    CaseName.ORSZAG_TANG_IDEAL: dict(
        cells=(256, 256), degrees=(2, 2), boundaries=(PERIODIC, PERIODIC),
        domains=((0.0, TWO_PI), (0.0, TWO_PI)), gamma=5.0 / 3.0, dt=1e-3, t_end=2.0,
        mu={"artificial": "2h2"}, eta={"artificial": "2h2"}, parameters={},
    ),
    CaseName.KELVIN_HELMHOLTZ: dict(
        cells=(128, 256), degrees=(2, 2), boundaries=(PERIODIC, PERIODIC),
        domains=((0.0, 1.0), (-1.0, 1.0)), gamma=7.0 / 5.0, dt=5e-4, t_end=2.0,
        mu={"artificial": "2h2"}, eta="off",
        parameters=dict(delta=1.0 / 15.0, amplitude=0.1),
    ),
    CaseName.CURRENT_SHEET_1D: dict(
        cells=(128,), degrees=(2,), boundaries=(CLAMPED,), domains=((-50.0, 50.0),),
        gamma=5.0 / 3.0, dt=2e-3, t_end=1000.0, mu="off", eta=0.1,
        parameters=dict(rho0=1.0, s0=9.62, bz0=1e4, by0=1e-3, t0=10.0),
    ),
    CaseName.CURRENT_SHEET_2D: dict(
        cells=(128, 256), degrees=(2, 2), boundaries=(PERIODIC, CLAMPED),
        domains=((0.0, 3.0 * TWO_PI), (-0.5 * math.pi, 0.5 * math.pi)),
        gamma=5.0 / 3.0, dt=0.1, t_end=40.0, mu="off", eta=2e-4,
        parameters=dict(delta=0.1, epsilon=1e-4, modes=list(range(1, 19)), phases=None,
                        linearized=True, growth_window=(15.0, 30.0)),
    ),
    CaseName.ORSZAG_TANG_VR: dict(
        cells=(256, 256), degrees=(2, 2), boundaries=(PERIODIC, PERIODIC),
        domains=((0.0, TWO_PI), (0.0, TWO_PI)), gamma=5.0 / 3.0, dt=1e-3, t_end=2.0,
        mu=0.01, eta=0.01, parameters={},
    ),
}

# Desk-scale overrides (minutes on a workstation).
DESK: Dict[CaseName, Dict[str, Any]] = {
    CaseName.DISPERSION_1D: dict(cells=(64,), mu="off", eta="off"),
    CaseName.ORSZAG_TANG_IDEAL: dict(cells=(64, 64), dt=2.5e-3, t_end=1.0),
    CaseName.KELVIN_HELMHOLTZ: dict(cells=(32, 64), dt=2e-3, t_end=0.5),
    CaseName.CURRENT_SHEET_1D: dict(dt=2e-2, t_end=100.0),
    CaseName.CURRENT_SHEET_2D: dict(cells=(64, 128)),
    CaseName.ORSZAG_TANG_VR: dict(cells=(64, 64), dt=2.5e-3),
}


def _build(name: CaseName, values: Dict[str, Any], provenance: Dict[str, Any]) -> CaseSpec:
    return CaseSpec(
        name=name,
        cells=tuple(int(n) for n in values["cells"]),
        degrees=tuple(int(p) for p in values["degrees"]),
        boundaries=tuple(Boundary(b) for b in values["boundaries"]),
        domains=tuple(tuple(float(v) for v in d) for d in values["domains"]),
        gamma=float(values["gamma"]),
        dt=float(values["dt"]),
        t_end=float(values["t_end"]),
        mu=DissipationSpec.parse(values["mu"]),
        eta=DissipationSpec.parse(values["eta"]),
        parameters=dict(values["parameters"]),
        provenance=provenance,
    )


def _name(name) -> CaseName:
    try:
        return CaseName(name) if not isinstance(name, CaseName) else name
    except ValueError as exc:
        known = ", ".join(n.value for n in CaseName)
        raise ConfigurationError(f"unknown case {name!r} (known: {known})") from exc


def published_preset(name) -> CaseSpec:
    name = _name(name)
    return _build(name, PUBLISHED[name], {"preset": "published"})


def desk_preset(name) -> CaseSpec:
    """Published parameters with the desk-scale overrides applied."""
    name = _name(name)
    values = {**PUBLISHED[name], **DESK[name]}
    changed = {key: PUBLISHED[name][key] for key in DESK[name]}
    return _build(name, values, {"preset": "desk", "published": to_plain(changed)})


def case_table() -> List[Dict[str, Any]]:
    """Published and desk parameters of every case."""
    rows = []
    for name in CaseName:
        rows.append({
            "case": name.value,
            "published": to_plain(PUBLISHED[name]),
            "desk": to_plain(DESK[name]),
        })
    return rows


def to_plain(value):
    """Tuples to lists and enums to values, for YAML/JSON output."""
    if isinstance(value, dict):
        return {k: to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, Boundary):
        return value.value
    return value


# ---------------------------------------------------------------- references

def reference_erf(x, t: float, eta: float, t0: float, by0: float):
    """B_y(x, t) = -B_y0 erf(x / (2 sqrt(eta (t + t0))))."""
    if not eta > 0.0 or not t + t0 > 0.0:
        raise ConfigurationError("reference_erf needs eta > 0 and t + t0 > 0")
    return -by0 * erf(0.5 * np.asarray(x, dtype=float) / math.sqrt(eta * (t + t0)))


def kh_profile(y, delta: float):
    return -np.tanh((y - 0.5) / delta) + np.tanh((y + 0.5) / delta)


def orszag_tang_vr_pressure(x, y):
    return (3.75 + 0.25 * np.cos(4.0 * x) + 0.8 * np.cos(2.0 * x) * np.cos(y)
            - np.cos(x) * np.cos(y) + 0.25 * np.cos(2.0 * y))


# ---------------------------------------------------------- initial states

Scalar = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


def _const(value: float) -> Scalar:
    return lambda x, y, z: np.full(np.shape(x), float(value))


def initial_functions(spec: CaseSpec, eos: Eos) -> Dict[str, Any]:
    """Analytic rho, s, u, B of a case (u may be replaced by noise)."""
    g = spec.gamma
    name = spec.name
    if name is CaseName.DISPERSION_1D:
        rho0 = spec.parameter("rho0", 1.0)
        bx, by, bz = spec.parameter("b0", (1.0, 1.0, 0.0))
        return dict(
            rho=_const(rho0),
            s=_const(float(eos.entropy_from_pressure(rho0, spec.parameter("p0", 1.0)))),
            u=None,
            B=lambda x, y, z: (np.full(np.shape(x), bx), np.full(np.shape(x), by),
                               np.full(np.shape(x), bz)),
        )
    if name is CaseName.ORSZAG_TANG_IDEAL:
        rho0 = g * g
        s0 = rho0 * math.log(g / ((g - 1.0) * g ** (2.0 * g)))
        return dict(
            rho=_const(rho0), s=_const(s0),
            u=lambda x, y, z: (-np.sin(y), np.sin(x), np.zeros(np.shape(x))),
            B=lambda x, y, z: (-np.sin(y), np.sin(2.0 * x), np.zeros(np.shape(x))),
        )
    if name is CaseName.ORSZAG_TANG_VR:
        return dict(
            rho=_const(1.0),
            s=lambda x, y, z: np.log(orszag_tang_vr_pressure(x, y) / (g - 1.0)),
            u=lambda x, y, z: (-np.sin(y), np.sin(x), np.zeros(np.shape(x))),
            B=lambda x, y, z: (-np.sin(y), np.sin(2.0 * x), np.zeros(np.shape(x))),
        )
    if name is CaseName.KELVIN_HELMHOLTZ:
        delta = spec.parameter("delta", 1.0 / 15.0)
        amplitude = spec.parameter("amplitude", 0.1)

        def rho(x, y, z):
            return 0.5 + 0.75 * kh_profile(y, delta)

        return dict(
            rho=rho,
            s=lambda x, y, z: eos.entropy_from_pressure(rho(x, y, z), 1.0),
            u=lambda x, y, z: (0.5 * (kh_profile(y, delta) - 1.0),
                               amplitude * np.sin(TWO_PI * x), np.zeros(np.shape(x))),
            B=None,
        )
    if name is CaseName.CURRENT_SHEET_1D:
        p = spec.parameters
        eta = spec.eta.value(0.0)
        return dict(
            rho=_const(p.get("rho0", 1.0)),
            s=_const(p.get("s0", 9.62)),
            u=lambda x, y, z: (np.zeros(np.shape(x)),) * 3,
            B=lambda x, y, z: (np.zeros(np.shape(x)),
                               reference_erf(x, 0.0, eta, p.get("t0", 10.0), p.get("by0", 1e-3)),
                               np.full(np.shape(x), p.get("bz0", 1e4))),
        )
    if name is CaseName.CURRENT_SHEET_2D:
        p = spec.parameters
        delta = p.get("delta", 0.1)
        epsilon = p.get("epsilon", 1e-4)
        modes = p.get("modes") or []
        phases = p.get("phases") or [0.0] * len(modes)
        if len(phases) != len(modes):
            raise ConfigurationError("one phase per excited mode is required")
        length = spec.domains[0][1] - spec.domains[0][0]

        def u(x, y, z):
            chi = np.tanh(delta * y) / np.cosh(delta * y)
            wave = sum(np.sin(TWO_PI * n / length * x + phi) for n, phi in zip(modes, phases))
            return np.zeros(np.shape(x)), epsilon * chi * wave, np.zeros(np.shape(x))

        def b(x, y, z):
            bx = np.tanh(y / delta)
            return bx + 0.0 * x, np.zeros(np.shape(x)), np.sqrt(np.maximum(1.0 - bx ** 2, 0.0)) + 0.0 * x

        return dict(
            rho=_const(1.0),
            s=_const(math.log(5.0 / (2.0 * (g - 1.0)))),
            u=u, B=b,
        )
    raise ConfigurationError(f"no initial condition for {name.value}")


def build_case_complex(spec: CaseSpec) -> DeRhamComplex:
    return build_complex(spec.degrees, spec.cells, spec.boundaries, spec.domains)


def init_case(spec: CaseSpec, projectors: Optional[Projectors] = None) -> State:
    """Project the initial condition of a case onto the complex."""
    projectors = projectors or Projectors(build_case_complex(spec))
    complex_ = projectors.complex
    _check_geometry(spec, complex_)
    eos = Eos(spec.gamma)
    functions = initial_functions(spec, eos)

    rho = projectors.project_3(functions["rho"])
    s = projectors.project_3(functions["s"])
    if functions["u"] is None:
        u = _noise_velocity(spec, projectors)
    else:
        u = projectors.project_x(functions["u"])
    u = u.with_coeffs(np.where(complex_.essential_mask(SpaceTag.X), 0.0, u.coeffs))
    if functions["B"] is None:
        b = complex_.zeros(SpaceTag.V2)
    else:
        b = projectors.project_2(functions["B"])
    logger.info("initialized case", extra={"case": spec.name.value, "cells": list(spec.cells)})
    return State(u=u, rho=rho, s=s, B=b)


def _noise_velocity(spec: CaseSpec, projectors: Projectors) -> Field:
    """Uniform noise in [-a, a] per component per Greville point."""
    rng = np.random.default_rng(spec.parameter("seed", 1234))
    amplitude = spec.parameter("amplitude", 1e-2)
    shape = projectors.grid(SpaceTag.X, 0).shape
    values = [rng.uniform(-amplitude, amplitude, size=shape) for _ in range(3)]
    return projectors.project_values(SpaceTag.X, values)


def _check_geometry(spec: CaseSpec, complex_: DeRhamComplex):
    actual = complex_.describe()
    expected = {
        "dim": spec.dim,
        "cells": list(spec.cells),
        "boundaries": [b.value for b in spec.boundaries],
    }
    for key, value in expected.items():
        got = actual[key] if key == "dim" else actual[key][:spec.dim]
        if got != value:
            raise ConfigurationError(f"complex does not match the {spec.name.value} geometry ({key})")


def step_config_for(spec: CaseSpec, initial: State, picard_tol: float = 1e-10,
                    picard_max_iters: int = 50) -> StepConfig:
    """Time stepping of a case; the tearing run diffuses B - B0 only."""
    return StepConfig(
        dt=spec.dt,
        picard_tol=picard_tol,
        picard_max_iters=picard_max_iters,
        mu=spec.mu,
        eta=spec.eta,
        linearized_B0=initial.B if spec.linearized else None,
        magnetic=spec.magnetic,
    )
