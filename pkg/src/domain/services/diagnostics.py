"""
Diagnostics: conserved quantities, line traces, space-time spectra,
dispersion branches, Fourier mode energies and growth-rate fits.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.domain.entities.case_spec import CaseName, CaseSpec
from src.domain.entities.diagnostics_record import DiagnosticsRecord
from src.domain.entities.state import State
from src.domain.exceptions import ConfigurationError, InvariantViolationError
from src.domain.services.cases import reference_erf
from src.domain.services.derham import DeRhamComplex
from src.domain.services.galerkin import Galerkin
from src.domain.value_objects.eos import Eos
from src.domain.value_objects.field import Field, SpaceTag
from src.domain.value_objects.weight import WeightFunction

logger = logging.getLogger(__name__)


class Diagnostics:
    """Integrals and samples of states on one complex."""

    def __init__(self, complex_: DeRhamComplex, eos: Eos, galerkin: Optional[Galerkin] = None):
        self.complex = complex_
        self.eos = eos
        self.galerkin = galerkin or Galerkin(complex_)

    def record(self, state: State) -> DiagnosticsRecord:
        c, g = self.complex, self.galerkin
        rho_q = c.evaluate(SpaceTag.V3, state.rho.coeffs)[0]
        s_q = c.evaluate(SpaceTag.V3, state.s.coeffs)[0]
        u = state.u.coeffs
        b = state.B.coeffs
        mass_rho = g.weighted_mass(SpaceTag.X, WeightFunction(rho_q, "rho"))
        div_b = c.D @ b
        u_q = c.evaluate(SpaceTag.X, u)
        return DiagnosticsRecord(
            time=state.time,
            step=state.step,
            mass=g.integral_3(state.rho.coeffs),
            entropy=g.integral_3(state.s.coeffs),
            e_kin=0.5 * float(u @ (mass_rho @ u)),
            e_int=c.integrate(self.eos.rho_e(rho_q, s_q)),
            e_mag=0.5 * float(b @ (g.mass_matrix(SpaceTag.V2) @ b)),
            divB_l2=float(np.sqrt(max(div_b @ (g.mass_matrix(SpaceTag.V3) @ div_b), 0.0))),
            momentum=tuple(c.integrate(rho_q * component) for component in u_q),
        )

    def check_invariants(self, state: State, reference_mass: float, bound: float):
        """
        Raise InvariantViolationError when int rho has drifted from
        reference_mass by more than bound (relative), or when ||D B||_L2
        exceeds bound times max(1, ||B||_L2).
        """
        c, g = self.complex, self.galerkin
        mass = g.integral_3(state.rho.coeffs)
        drift = abs(mass - reference_mass)
        if drift > bound * abs(reference_mass):
            raise InvariantViolationError(
                f"mass drifted by {drift:.3e} from {reference_mass:.9e} at step {state.step}"
            )
        b = state.B.coeffs
        div_b = c.D @ b
        div_l2 = float(np.sqrt(max(div_b @ (g.mass_matrix(SpaceTag.V3) @ div_b), 0.0)))
        b_l2 = float(np.sqrt(max(b @ (g.mass_matrix(SpaceTag.V2) @ b), 0.0)))
        if div_l2 > bound * max(1.0, b_l2):
            raise InvariantViolationError(
                f"div B grew to {div_l2:.3e} (|B| {b_l2:.3e}) at step {state.step}"
            )

    # ---------------------------------------------------------------- samples

    def sample_points(self, points_per_cell: int = 2) -> List[np.ndarray]:
        """Uniform points per direction (periodic directions exclude the right end)."""
        grids = []
        for direction in self.complex.directions:
            if direction.trivial:
                grids.append(np.array([0.5]))
                continue
            space = direction.high
            n = points_per_cell * space.n_cells
            a, b = space.domain
            grids.append(np.linspace(a, b, n, endpoint=not space.periodic))
        return grids

    def evaluate(self, field: Field, points: Sequence[np.ndarray]) -> List[np.ndarray]:
        return self.complex.evaluate_at(field.space_tag, field.coeffs, points)

    def pressure_field(self, state: State, points: Sequence[np.ndarray]) -> np.ndarray:
        """p(rho_h, s_h) on the tensor grid of `points`."""
        rho = self.evaluate(state.rho, points)[0]
        s = self.evaluate(state.s, points)[0]
        return self.eos.pressure(rho, s)

    def line_trace(self, field: Field, component: int = 0, y: Optional[float] = None,
                   z: Optional[float] = None, points_per_cell: int = 2) -> Tuple[np.ndarray, np.ndarray]:
        """Samples of one component along x at fixed (y, z)."""
        x = self.sample_points(points_per_cell)[0]
        points = [x, self._transverse(1, y), self._transverse(2, z)]
        return x, self.evaluate(field, points)[component][:, 0, 0]

    def pressure_trace(self, state: State, y: Optional[float] = None,
                       points_per_cell: int = 2) -> Tuple[np.ndarray, np.ndarray]:
        x = self.sample_points(points_per_cell)[0]
        points = [x, self._transverse(1, y), self._transverse(2, None)]
        return x, self.pressure_field(state, points)[:, 0, 0]

    def _transverse(self, axis: int, value: Optional[float]) -> np.ndarray:
        direction = self.complex.directions[axis]
        if value is None:
            a, b = direction.high.domain
            value = 0.5 * (a + b)
        return np.array([float(value)])

    # ------------------------------------------------------------ mode energy

    def mode_energies(self, b: Field, modes: Sequence[int],
                      points_per_cell: int = 4) -> Dict[int, float]:
        """
        Magnetic energy carried by the x-Fourier modes k_x = 2 pi n / L_x,
        integrated over the transverse directions.
        """
        b.require(SpaceTag.V2)
        x_dir = self.complex.directions[0]
        if not x_dir.high.periodic:
            raise ConfigurationError("mode energies need a periodic x direction")
        n_x = points_per_cell * x_dir.high.n_cells
        if max(modes, default=0) > n_x // 2:
            raise ConfigurationError("requested modes exceed the sampling resolution")
        a, length = x_dir.high.domain[0], x_dir.high.length
        x = a + length * np.arange(n_x) / n_x
        points = [x, self.complex.directions[1].quad_points, self.complex.directions[2].quad_points]
        weights = (self.complex.directions[1].quad_weights[:, None]
                   * self.complex.directions[2].quad_weights[None, :])
        spectrum = np.zeros(n_x // 2 + 1)
        for component in self.evaluate(b, points):
            coefficients = np.fft.rfft(component, axis=0) / n_x
            spectrum += np.einsum("kyz,yz->k", np.abs(coefficients) ** 2, weights)
        factors = np.full(spectrum.shape, length)
        factors[0] = 0.5 * length
        if n_x % 2 == 0:
            factors[-1] = 0.5 * length
        energies = factors * spectrum
        return {int(n): float(energies[n]) for n in modes}

    def total_mode_energy(self, b: Field, points_per_cell: int = 4) -> float:
        n_x = points_per_cell * self.complex.directions[0].high.n_cells
        return sum(self.mode_energies(b, range(n_x // 2 + 1), points_per_cell).values())

    # ------------------------------------------------------------- erf oracle

    def erf_comparison(self, state: State, spec: CaseSpec,
                       points_per_cell: int = 2) -> List[Tuple[float, float, float, float]]:
        """Rows (x, simulated B_y, reference B_y, error) of the 1D current sheet."""
        if spec.name is not CaseName.CURRENT_SHEET_1D:
            raise ConfigurationError(f"no erf reference for {spec.name.value}")
        x, simulated = self.line_trace(state.B, component=1, points_per_cell=points_per_cell)
        reference = reference_erf(x, state.time, spec.eta.value(0.0), spec.parameter("t0", 10.0),
                                  spec.parameter("by0", 1e-3))
        return [(float(a), float(b), float(c), float(b - c)) for a, b, c in zip(x, simulated, reference)]


# -------------------------------------------------------------------- spectra

@dataclass(frozen=True)
class Spectrum:
    """Power over (omega, k) with axes in angular units, both ascending."""

    k: np.ndarray
    omega: np.ndarray
    power: np.ndarray  # shape (len(omega), len(k))

    def peak(self) -> Tuple[float, float]:
        i, j = np.unravel_index(np.argmax(self.power), self.power.shape)
        return float(self.k[j]), float(self.omega[i])


def _uniform_step(samples: np.ndarray, what: str) -> float:
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 1 or len(samples) < 2:
        raise ConfigurationError(f"{what} needs at least two samples")
    steps = np.diff(samples)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0) or steps[0] <= 0.0:
        raise ConfigurationError(f"{what} must be sampled uniformly")
    return float(steps[0])


def spacetime_spectrum(history: np.ndarray, x: np.ndarray, times: np.ndarray,
                       time_padding: int = 1) -> Spectrum:
    """
    Fourier power of a trace f(t, x) for waves exp(i(kx - omega t)).

    history has shape (len(times), len(x)); x must exclude the periodic end.
    time_padding > 1 zero-pads in time to refine the omega axis.
    """
    history = np.asarray(history, dtype=float)
    if history.shape != (len(times), len(x)):
        raise ConfigurationError("history shape must be (len(times), len(x))")
    dx = _uniform_step(x, "space")
    dt = _uniform_step(times, "time")
    if time_padding < 1:
        raise ConfigurationError("time_padding must be >= 1")
    nt, nx = history.shape
    n_omega = nt * int(time_padding)
    # forward transform in x, inverse-sign transform in t
    transform = np.fft.fft(np.fft.ifft(history, n=n_omega, axis=0) * n_omega, axis=1)
    power = np.abs(np.fft.fftshift(transform)) ** 2 / (nt * nx) ** 2
    k = np.fft.fftshift(2.0 * np.pi * np.fft.fftfreq(nx, dx))
    omega = np.fft.fftshift(2.0 * np.pi * np.fft.fftfreq(n_omega, dt))
    return Spectrum(k=k, omega=omega, power=power)


def dispersion_branches(k, rho0: float, p0: float, b: Sequence[float], gamma: float) -> Dict[str, np.ndarray]:
    """Shear Alfven, slow and fast magnetosonic omega(k) >= 0 for waves along x."""
    k = np.abs(np.asarray(k, dtype=float))
    bx, by = float(b[0]), float(b[1])
    b2 = bx * bx + by * by
    if rho0 <= 0.0 or b2 <= 0.0:
        raise ConfigurationError("dispersion branches need rho0 > 0 and |B| > 0")
    va2 = b2 / rho0
    cs2 = gamma * p0 / rho0
    delta = 4.0 * bx * bx * cs2 * va2 / ((cs2 + va2) ** 2 * b2)
    root = np.sqrt(max(1.0 - delta, 0.0))
    return {
        "shear": k * np.sqrt(va2 * bx * bx / b2),
        "slow": k * np.sqrt(0.5 * (cs2 + va2) * (1.0 - root)),
        "fast": k * np.sqrt(0.5 * (cs2 + va2) * (1.0 + root)),
    }


def ridge_frequencies(spectrum: Spectrum, k_values: Sequence[float],
                      n_peaks: int = 1) -> List[np.ndarray]:
    """Frequencies omega > 0 of the strongest local maxima of |F|^2 in each k bin."""
    positive = spectrum.omega > 0.0
    omega = spectrum.omega[positive]
    out = []
    for k in k_values:
        column = spectrum.power[positive, int(np.argmin(np.abs(spectrum.k - k)))]
        interior = np.flatnonzero((column[1:-1] >= column[:-2]) & (column[1:-1] >= column[2:])) + 1
        ranked = interior[np.argsort(column[interior])[::-1]][:n_peaks]
        out.append(np.sort(omega[ranked]))
    return out


# ------------------------------------------------------------------- growth

def growth_rate(times: Sequence[float], energies: Sequence[float],
                window: Optional[Tuple[float, float]] = None) -> Tuple[float, float]:
    """
    Least-squares fit of 0.5 log E = rate t + c over `window`.

    Returns (rate, R^2).
    """
    t = np.asarray(times, dtype=float)
    e = np.asarray(energies, dtype=float)
    if window is not None:
        keep = (t >= window[0]) & (t <= window[1])
        t, e = t[keep], e[keep]
    if len(t) < 3 or np.any(e <= 0.0):
        raise ConfigurationError("growth fit needs at least three positive energies")
    y = 0.5 * np.log(e)
    slope, intercept = np.polyfit(t, y, 1)
    residual = y - (slope * t + intercept)
    total = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(residual ** 2) / total if total > 0.0 else 1.0
    return float(slope), float(r2)


# -------------------------------------------------------------------- shocks

def shock_width(profile: Sequence[float], dx: float, cell_size: float) -> float:
    """Width in cells over which the steepest jump of a line cut goes from 10% to 90%."""
    f = np.asarray(profile, dtype=float)
    if len(f) < 3:
        raise ConfigurationError("profile too short")
    slope = np.gradient(f, dx)
    center = int(np.argmax(np.abs(slope)))
    sign = np.sign(slope[center])
    left = center
    while left > 0 and sign * (f[left] - f[left - 1]) > 0.0:
        left -= 1
    right = center
    while right < len(f) - 1 and sign * (f[right + 1] - f[right]) > 0.0:
        right += 1
    segment = f[left:right + 1]
    x = dx * np.arange(left, right + 1)
    low, high = f[left], f[right]
    levels = low + np.array([0.1, 0.9]) * (high - low)
    order = np.argsort(segment)
    crossings = np.interp(levels, segment[order], x[order])
    return float(abs(crossings[1] - crossings[0]) / cell_size)
