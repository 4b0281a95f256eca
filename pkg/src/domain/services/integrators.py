"""
Split propagators of the viscoresistive MHD system and their Strang
composition.

Each propagator advances a subset of (u, rho, s, B) and conserves total
energy exactly at convergence of its solves: the ideal sub-steps are
discrete-gradient midpoint schemes, the dissipative ones re-deposit the lost
kinetic or magnetic energy as internal energy.

The ideal sub-steps freeze their transport operator (flux weight, cross
product, bracket momentum) at the state entering the step. Their adjoints
freeze it at the state leaving the step instead; the second half of the
Strang sequence runs the adjoints, which makes the composition symmetric.
"""
import logging
import time
from collections import defaultdict
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from src.domain.entities.state import State, StepConfig
from src.domain.exceptions import (
    ConfigurationError,
    InvariantViolationError,
    SolverError,
    ThermodynamicStateError,
)
from src.domain.services.derham import DeRhamComplex
from src.domain.services.galerkin import Galerkin, LinearOperator
from src.domain.services.projectors import Projectors
from src.domain.services.stabilization import Stabilization
from src.domain.value_objects.eos import Eos
from src.domain.value_objects.field import SpaceTag
from src.domain.value_objects.weight import WeightFunction

logger = logging.getLogger(__name__)

# Strang sequence, each entry applied with dt/2.
PROPAGATOR_ORDER: Tuple[str, ...] = (
    "rho", "m", "s", "B", "visc", "res", "res", "visc", "B", "s", "m", "rho",
)
MAGNETIC_PROPAGATORS = frozenset({"B", "res"})


def _increment(new: np.ndarray, old: np.ndarray, floor: float = 1.0) -> float:
    """Picard increment relative to max(|new|, floor)."""
    return np.linalg.norm(new - old) / max(np.linalg.norm(new), floor)


class SplitIntegrator:
    """Propagators Phi^rho, Phi^m, Phi^s, Phi^B, Phi^visc, Phi^res and Strang."""

    def __init__(self, complex_: DeRhamComplex, eos: Eos,
                 projectors: Optional[Projectors] = None,
                 galerkin: Optional[Galerkin] = None):
        self.complex = complex_
        self.eos = eos
        self.projectors = projectors or Projectors(complex_)
        self.galerkin = galerkin or Galerkin(complex_)
        self.stabilization = Stabilization(self.galerkin)
        self._free = complex_.free_dofs(SpaceTag.X)
        self._n_x = complex_.dimension(SpaceTag.X)
        self.timings: Dict[str, float] = defaultdict(float)
        self.calls: Dict[str, int] = defaultdict(int)
        self.picard_iterations: Dict[str, int] = defaultdict(int)

    # ------------------------------------------------------------- helpers

    def values(self, tag: SpaceTag, coeffs: np.ndarray):
        return self.complex.evaluate(tag, coeffs)

    def density_values(self, rho: np.ndarray) -> np.ndarray:
        values = self.complex.evaluate(SpaceTag.V3, rho)[0]
        if np.any(~(values > 0.0)):
            raise ThermodynamicStateError(
                f"density not positive at the quadrature nodes (min {np.nanmin(values):.3e})"
            )
        return values

    def momentum_mass(self, rho_values: np.ndarray) -> LinearOperator:
        return self.galerkin.weighted_mass(SpaceTag.X, WeightFunction(rho_values, "rho"))

    def velocity_scale(self, state: State, rho_values: np.ndarray) -> float:
        """
        Coefficient norm of a uniform flow at the fastest magnetosonic speed,
        sqrt(max (gamma p + |B|^2) / rho) times sqrt(dim X).
        """
        s_values = self.values(SpaceTag.V3, state.s.coeffs)[0]
        speed2 = self.eos.sound_speed_squared(rho_values, s_values)
        if np.any(state.B.coeffs):
            b_values = self.values(SpaceTag.V2, state.B.coeffs)
            speed2 = speed2 + sum(b * b for b in b_values) / rho_values
        return float(np.sqrt(np.max(speed2) * self._n_x))

    def _embed(self, x_free: np.ndarray) -> np.ndarray:
        x = np.zeros(self._n_x)
        x[self._free] = x_free
        return x

    def _free_operator(self, apply: Callable[[np.ndarray], np.ndarray]):
        return lambda x_free: apply(self._embed(x_free))[self._free]

    def _velocity_solve(self, apply, rhs, preconditioner: LinearOperator, x0, name):
        """CG on the momentum test space (X minus clamped boundary DOFs)."""
        x_free = self.galerkin.cg(
            self._free_operator(apply), rhs[self._free],
            preconditioner=preconditioner,
            x0=x0[self._free], name=name,
        )
        return self._embed(x_free)

    def _dot_quad(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Pointwise u.v of two X fields at the quadrature nodes."""
        return sum(x * y for x, y in zip(self.values(SpaceTag.X, a), self.values(SpaceTag.X, b)))

    def _picard(self, name: str, cfg: StepConfig,
                update: Callable[[Tuple[np.ndarray, ...]], Tuple[np.ndarray, ...]],
                start: Tuple[np.ndarray, ...], floors: Sequence[float],
                message: str = "Picard iteration did not converge") -> Tuple[np.ndarray, ...]:
        """Iterate x <- update(x) until every component moves less than picard_tol."""
        current = start
        for iteration in range(1, cfg.picard_max_iters + 1):
            new = update(current)
            change = max(_increment(a, b, floor) for a, b, floor in zip(new, current, floors))
            current = new
            if change < cfg.picard_tol:
                break
        else:
            raise SolverError(message, iterations=iteration, residual=float(change))
        self._record_picard(name, iteration, cfg)
        return current

    # -------------------------------------------------------------- Phi^m

    def step_m(self, state: State, cfg: StepConfig, dt: Optional[float] = None,
               adjoint: bool = False) -> State:
        """
        Velocity self-advection. The bracket carries the momentum rho u^n,
        one linear solve; the adjoint carries rho u^{n+1} and iterates.
        """
        dt = cfg.dt if dt is None else dt
        u = state.u.coeffs
        if not np.any(u):
            return state
        rho_q = self.density_values(state.rho.coeffs)
        mass = self.momentum_mass(rho_q)
        preconditioner = LinearOperator(mass.matrix / dt, "M[rho]_X/dt").restricted(self._free)

        def solve(velocity: np.ndarray) -> np.ndarray:
            momentum = mass @ velocity

            def bracket(a):
                return self.projectors.bracket_covector(a, momentum)

            # unknown: delta = u^{n+1} - u^n
            operator = self._free_operator(lambda x: mass @ x / dt - 0.5 * bracket(x))
            delta = self.galerkin.gmres(operator, bracket(u)[self._free],
                                        preconditioner=preconditioner, name="m")
            return u + self._embed(delta)

        u_new = solve(u)
        if adjoint:
            (u_new,) = self._picard("m", cfg, lambda x: (solve(x[0]),), (u_new,),
                                    (self.velocity_scale(state, rho_q),))
        return state.evolve(u=state.u.with_coeffs(u_new))

    # ------------------------------------------------------------ Phi^rho

    def step_rho(self, state: State, cfg: StepConfig, dt: Optional[float] = None,
                 adjoint: bool = False) -> State:
        """
        Density advection coupled to the momentum through dq_rho. The flux
        weight is rho^n, or the iterate rho^{n+1} for the adjoint.
        """
        dt = cfg.dt if dt is None else dt
        c = self.complex
        u, rho, s = state.u.coeffs, state.rho.coeffs, state.s.coeffs
        rho_q = self.density_values(rho)
        s_q = self.values(SpaceTag.V3, s)[0]
        flux_n = self.projectors.flux_operator(state.rho)
        mass_n = self.momentum_mass(rho_q)
        momentum = mass_n @ u
        preconditioner = mass_n.restricted(self._free)

        def update(current):
            u_star, rho_star = current
            flux = (self.projectors.flux_operator(state.rho.with_coeffs(rho_star))
                    if adjoint else flux_n)

            def div_flux(v):
                return c.D @ flux.apply(v)

            def div_flux_t(q):
                return flux.apply_transpose(c.D.T @ q)

            rho_star_q = self.density_values(rho_star)
            dq = self.eos.dq_rho(rho_q, rho_star_q, s_q)
            w = 0.5 * self.eos.second_derivatives(0.5 * (rho_q + rho_star_q), s_q)[0]
            mass_w = self.galerkin.weighted_mass(SpaceTag.V3, WeightFunction(w, "W_rho")).matrix
            mass_star = self.momentum_mass(rho_star_q)
            load = self.galerkin.load_3(0.5 * self._dot_quad(u_star, u) - dq)

            def jacobian(x):
                return mass_w @ div_flux(x)

            rhs = (momentum - dt * div_flux_t(load)
                   + dt * div_flux_t(mass_w @ (rho - rho_star))
                   - 0.5 * dt * dt * div_flux_t(jacobian(u)))
            u_new = self._velocity_solve(
                lambda x: mass_star @ x + 0.5 * dt * dt * div_flux_t(jacobian(x)),
                rhs, preconditioner, u_star, "rho",
            )
            return u_new, rho - 0.5 * dt * div_flux(u_new + u)

        u_new, rho_new = self._picard("rho", cfg, update, (u.copy(), rho.copy()),
                                      (self.velocity_scale(state, rho_q), 1.0))
        self.density_values(rho_new)
        return state.evolve(u=state.u.with_coeffs(u_new), rho=state.rho.with_coeffs(rho_new))

    # -------------------------------------------------------------- Phi^s

    def step_s(self, state: State, cfg: StepConfig, dt: Optional[float] = None,
               adjoint: bool = False) -> State:
        """
        Entropy advection coupled to the momentum through dq_s. The flux
        weight is s^n, or the iterate s^{n+1} for the adjoint.
        """
        dt = cfg.dt if dt is None else dt
        c = self.complex
        u, s = state.u.coeffs, state.s.coeffs
        rho_q = self.density_values(state.rho.coeffs)
        s_q = self.values(SpaceTag.V3, s)[0]
        flux_n = self.projectors.flux_operator(state.s)
        mass = self.momentum_mass(rho_q)
        momentum = mass @ u
        preconditioner = mass.restricted(self._free)

        def update(current):
            u_star, s_star = current
            flux = self.projectors.flux_operator(state.s.with_coeffs(s_star)) if adjoint else flux_n

            def div_flux(v):
                return c.D @ flux.apply(v)

            def div_flux_t(q):
                return flux.apply_transpose(c.D.T @ q)

            s_star_q = self.values(SpaceTag.V3, s_star)[0]
            dq = self.eos.dq_s(rho_q, s_q, s_star_q)
            w = 0.5 * self.eos.second_derivatives(rho_q, 0.5 * (s_q + s_star_q))[1]
            mass_w = self.galerkin.weighted_mass(SpaceTag.V3, WeightFunction(w, "W_s")).matrix

            def jacobian(x):
                return mass_w @ div_flux(x)

            rhs = (momentum + dt * div_flux_t(self.galerkin.load_3(dq))
                   + dt * div_flux_t(mass_w @ (s - s_star))
                   - 0.5 * dt * dt * div_flux_t(jacobian(u)))
            u_new = self._velocity_solve(
                lambda x: mass @ x + 0.5 * dt * dt * div_flux_t(jacobian(x)),
                rhs, preconditioner, u_star, "s",
            )
            return u_new, s - 0.5 * dt * div_flux(u_new + u)

        u_new, s_new = self._picard("s", cfg, update, (u.copy(), s.copy()),
                                    (self.velocity_scale(state, rho_q), 1.0))
        return state.evolve(u=state.u.with_coeffs(u_new), s=state.s.with_coeffs(s_new))

    # -------------------------------------------------------------- Phi^B

    def step_B(self, state: State, cfg: StepConfig, dt: Optional[float] = None,
               adjoint: bool = False) -> State:
        """
        Magnetic advection. The cross product is taken with B^n, or with the
        iterate B^{n+1} for the adjoint. B^{n+1} is eliminated, leaving the
        SPD system (M[rho] + dt^2/4 Q^T C^T M2 C Q) u^{n+1} = rhs, so the
        Lorentz force acts through B^{n+1/2}.
        """
        dt = cfg.dt if dt is None else dt
        b = state.B.coeffs
        if not np.any(b):
            return state
        c = self.complex
        u = state.u.coeffs
        rho_q = self.density_values(state.rho.coeffs)
        mass = self.momentum_mass(rho_q)
        preconditioner = mass.restricted(self._free)
        m2 = self.galerkin.mass_matrix(SpaceTag.V2).matrix

        def solve(cross, guess):
            def curl_cross(v):
                return c.C @ cross.apply(v)

            def curl_cross_t(w):
                return cross.apply_transpose(c.C.T @ w)

            def schur(v):
                return curl_cross_t(m2 @ curl_cross(v))

            rhs = mass @ u + dt * curl_cross_t(m2 @ b) - 0.25 * dt * dt * schur(u)
            u_new = self._velocity_solve(lambda x: mass @ x + 0.25 * dt * dt * schur(x),
                                         rhs, preconditioner, guess, "B")
            return u_new, b - dt * curl_cross(0.5 * (u + u_new))

        u_new, b_new = solve(self.projectors.cross_operator(state.B), u)
        if adjoint:
            def update(current):
                u_star, b_star = current
                return solve(self.projectors.cross_operator(state.B.with_coeffs(b_star)), u_star)

            u_new, b_new = self._picard("B", cfg, update, (u_new, b_new),
                                        (self.velocity_scale(state, rho_q), 1.0))
        return state.evolve(u=state.u.with_coeffs(u_new), B=state.B.with_coeffs(b_new))

    # ----------------------------------------------------------- Phi^visc

    def step_visc(self, state: State, cfg: StepConfig, mu: Optional[WeightFunction] = None,
                  dt: Optional[float] = None) -> State:
        """Implicit viscous diffusion of u; the lost energy heats the plasma."""
        dt = cfg.dt if dt is None else dt
        if mu is None:
            mu = self.stabilization.mu(cfg.mu, state.u)
        if mu is None or mu.is_zero:
            return state
        mu.require_nonnegative()
        u = state.u.coeffs
        rho_q = self.density_values(state.rho.coeffs)
        mass = self.momentum_mass(rho_q)
        stiffness = self.galerkin.vector_stiffness(mu)
        system = LinearOperator(mass.matrix / dt + stiffness, "visc", self.galerkin.linear_tol)
        free = self._free
        u_new = self._embed(system.restricted(free).solve((mass @ u / dt)[free]))

        heating = np.zeros(self.complex.quad_shape)
        u_half = 0.5 * (u + u_new)
        for axis, direction in enumerate(self.complex.directions):
            if direction.trivial:
                continue
            grads_half = self.complex.evaluate(SpaceTag.X, u_half, deriv_axis=axis)
            grads_new = self.complex.evaluate(SpaceTag.X, u_new, deriv_axis=axis)
            heating += sum(a * b for a, b in zip(grads_half, grads_new))
        s_new = self._heat(rho_q, state.s.coeffs, mu.values * heating, dt, cfg, "visc")
        return state.evolve(u=state.u.with_coeffs(u_new), s=state.s.with_coeffs(s_new))

    # ------------------------------------------------------------ Phi^res

    def step_res(self, state: State, cfg: StepConfig, eta: Optional[WeightFunction] = None,
                 dt: Optional[float] = None) -> State:
        """Implicit resistive diffusion of B; the lost energy heats the plasma."""
        return self._resistive(state, cfg, eta, dt, None)

    def step_res_linearized(self, state: State, cfg: StepConfig,
                            eta: Optional[WeightFunction] = None,
                            dt: Optional[float] = None) -> State:
        """As step_res, with diffusion and heating acting on B - B0 only."""
        if cfg.linearized_B0 is None:
            raise ConfigurationError("the linearized resistive step needs linearized_B0")
        return self._resistive(state, cfg, eta, dt, cfg.linearized_B0.coeffs)

    def _resistive(self, state, cfg, eta, dt, b0) -> State:
        dt = cfg.dt if dt is None else dt
        if eta is None:
            eta = self.stabilization.eta(cfg.eta, state.B)
        if eta is None or eta.is_zero:
            return state
        eta.require_nonnegative()
        c, g = self.complex, self.galerkin
        b = state.B.coeffs
        b0 = np.zeros_like(b) if b0 is None else b0
        free1 = c.free_dofs(SpaceTag.V1)
        curl = c.C[:, free1]
        m2 = g.mass_matrix(SpaceTag.V2).matrix
        m1 = g.free_mass(SpaceTag.V1)
        m_eta = g.weighted_mass(SpaceTag.V1, eta).matrix[free1][:, free1]

        def current(x):
            return m1.solve(curl.T @ (m2 @ x))

        def electric(x):
            """M1^{-1} M[eta]_1 curl~(x) on the free V1 DOFs."""
            return m1.solve(m_eta @ current(x))

        def apply(x):
            return m2 @ x + dt * (m2 @ (curl @ electric(x)))

        rhs = m2 @ b + dt * (m2 @ (curl @ electric(b0)))
        solved = g.cg(apply, rhs, preconditioner=g.mass_matrix(SpaceTag.V2), x0=b.copy(),
                      name="res")
        # rebuild from the update so B^{n+1} - B^n lies exactly in the range of curl
        b_new = b - dt * (curl @ electric(solved - b0))

        j_half = np.zeros(c.dimension(SpaceTag.V1))
        j_new = np.zeros(c.dimension(SpaceTag.V1))
        j_half[free1] = current(0.5 * (b + b_new) - b0)
        j_new[free1] = current(b_new - b0)
        heating = sum(a * bb for a, bb in zip(self.values(SpaceTag.V1, j_half),
                                              self.values(SpaceTag.V1, j_new)))
        rho_q = self.density_values(state.rho.coeffs)
        s_new = self._heat(rho_q, state.s.coeffs, eta.values * heating, dt, cfg, "res")
        return state.evolve(B=state.B.with_coeffs(b_new), s=state.s.with_coeffs(s_new))

    def _heat(self, rho_q, s, heating, dt, cfg, name) -> np.ndarray:
        """
        Solve  int (rho e(s^{n+1}) - rho e(s^n)) q = dt int heating q  for s^{n+1}
        by Picard on  M[dq_s(s^n, s*)]_3 (s^{n+1} - s^n) = dt L(heating).
        """
        if not np.any(heating):
            return s
        g = self.galerkin
        load = dt * g.load_3(heating)
        s_q = self.values(SpaceTag.V3, s)[0]

        def update(current):
            s_star_q = self.values(SpaceTag.V3, current[0])[0]
            weight = WeightFunction(self.eos.dq_s(rho_q, s_q, s_star_q), "T")
            return (s + g.weighted_mass(SpaceTag.V3, weight, invertible=True).solve(load),)

        (s_star,) = self._picard(f"{name}.entropy", cfg, update, (s.copy(),), (1.0,),
                                 message="entropy update did not converge")
        produced = g.integral_3(s_star - s)
        if produced < -1e-12 * max(1.0, abs(g.integral_3(s))):
            logger.warning("entropy decreased in a dissipative step",
                           extra={"propagator": name, "change": produced})
        return s_star

    def _record_picard(self, name, iterations, cfg):
        self.picard_iterations[name] += iterations
        if iterations > cfg.picard_max_iters // 2:
            logger.warning("slow nonlinear convergence",
                           extra={"propagator": name, "iterations": iterations})
        else:
            logger.debug("nonlinear solve", extra={"propagator": name, "iterations": iterations})

    # ------------------------------------------------------------- Strang

    def dissipation_weights(self, state: State, cfg: StepConfig):
        """mu and eta frozen for one outer step, from the state at its start."""
        eta = self.stabilization.eta(cfg.eta, state.B) if cfg.magnetic else None
        return self.stabilization.mu(cfg.mu, state.u), eta

    def strang_step(self, state: State, cfg: StepConfig) -> State:
        """
        One full step: the symmetric sequence of half-step propagators, with
        the ideal ones of the second half run as adjoints.
        """
        mu, eta = self.dissipation_weights(state, cfg)
        half = 0.5 * cfg.dt
        seen: Dict[str, int] = defaultdict(int)
        current = state
        for position, name in enumerate(PROPAGATOR_ORDER):
            seen[name] += 1
            if name in MAGNETIC_PROPAGATORS and not cfg.magnetic:
                continue
            if (name == "visc" and mu is None) or (name == "res" and eta is None):
                continue
            label = f"{name}[{seen[name]}]"
            adjoint = 2 * position >= len(PROPAGATOR_ORDER)
            started = time.perf_counter()
            try:
                current = self._propagate(name, current, cfg, half, mu, eta, adjoint)
            except SolverError as exc:
                raise exc.with_substep(label) from exc
            except ThermodynamicStateError as exc:
                raise ThermodynamicStateError(f"[{label}] {exc}") from exc
            self.timings[name] += time.perf_counter() - started
            self.calls[name] += 1
        self._check_finite(current)
        return current.advanced(cfg.dt)

    def _propagate(self, name, state, cfg, dt, mu, eta, adjoint=False) -> State:
        if name == "rho":
            return self.step_rho(state, cfg, dt, adjoint=adjoint)
        if name == "m":
            return self.step_m(state, cfg, dt, adjoint=adjoint)
        if name == "s":
            return self.step_s(state, cfg, dt, adjoint=adjoint)
        if name == "B":
            return self.step_B(state, cfg, dt, adjoint=adjoint)
        if name == "visc":
            return self.step_visc(state, cfg, mu, dt)
        if cfg.linearized_B0 is not None:
            return self.step_res_linearized(state, cfg, eta, dt)
        return self.step_res(state, cfg, eta, dt)

    @staticmethod
    def _check_finite(state: State):
        for name in ("u", "rho", "s", "B"):
            if not np.all(np.isfinite(getattr(state, name).coeffs)):
                raise InvariantViolationError(f"non-finite values in {name}")

    def performance_ledger(self) -> Dict[str, dict]:
        """Wall-clock seconds, call counts and Picard iterations per propagator."""
        names = sorted(set(self.timings) | set(self.picard_iterations))
        return {
            name: {
                "seconds": self.timings.get(name, 0.0),
                "calls": self.calls.get(name, 0),
                "picard_iterations": self.picard_iterations.get(name, 0),
            }
            for name in names
        }
