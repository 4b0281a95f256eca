"""
Wiring of the numerical services for one case.
"""
from dataclasses import dataclass

from src.domain.entities.case_spec import CaseSpec
from src.domain.services.cases import build_case_complex
from src.domain.services.derham import DeRhamComplex
from src.domain.services.diagnostics import Diagnostics
from src.domain.services.galerkin import DEFAULT_LINEAR_TOL, DEFAULT_MAX_LINEAR_ITERATIONS, Galerkin
from src.domain.services.integrators import SplitIntegrator
from src.domain.services.projectors import Projectors
from src.domain.value_objects.eos import Eos


@dataclass
class SimulationContext:
    """Complex, projectors, Galerkin layer, integrator and diagnostics of a case."""

    case: CaseSpec
    complex: DeRhamComplex
    eos: Eos
    projectors: Projectors
    galerkin: Galerkin
    integrator: SplitIntegrator
    diagnostics: Diagnostics

    @classmethod
    def build(cls, case: CaseSpec, linear_tol: float = DEFAULT_LINEAR_TOL,
              max_linear_iterations: int = DEFAULT_MAX_LINEAR_ITERATIONS) -> "SimulationContext":
        complex_ = build_case_complex(case)
        eos = Eos(case.gamma)
        projectors = Projectors(complex_)
        galerkin = Galerkin(complex_, linear_tol, max_linear_iterations)
        return cls(
            case=case,
            complex=complex_,
            eos=eos,
            projectors=projectors,
            galerkin=galerkin,
            integrator=SplitIntegrator(complex_, eos, projectors, galerkin),
            diagnostics=Diagnostics(complex_, eos, galerkin),
        )
