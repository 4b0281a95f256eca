"""
Perfect-gas equation of state written in terms of the internal energy
density rho*e(rho, s) = rho^gamma * exp(s / rho).
"""
from dataclasses import dataclass

import numpy as np
from scipy.special import exprel

from src.domain.exceptions import ConfigurationError, ThermodynamicStateError


def _check_density(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    if np.any(~(rho > 0.0)):
        raise ThermodynamicStateError("density must be strictly positive")
    return rho


@dataclass(frozen=True)
class Eos:
    """e(rho, s) = rho^(gamma-1) exp(s/rho)."""

    gamma: float = 5.0 / 3.0

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ConfigurationError(f"adiabatic index must be > 1, got {self.gamma}")

    def rho_e(self, rho, s):
        rho = _check_density(rho)
        return rho ** self.gamma * np.exp(np.asarray(s, dtype=float) / rho)

    def temperature(self, rho, s):
        """T = d(rho e)/ds."""
        rho = _check_density(rho)
        return rho ** (self.gamma - 1.0) * np.exp(np.asarray(s, dtype=float) / rho)

    def pressure(self, rho, s):
        return (self.gamma - 1.0) * self.rho_e(rho, s)

    def drho_rho_e(self, rho, s):
        """d(rho e)/drho = rho e (gamma - s/rho) / rho."""
        rho = _check_density(rho)
        return self.rho_e(rho, s) * (self.gamma - np.asarray(s, dtype=float) / rho) / rho

    def second_derivatives(self, rho, s):
        """(d2(rho e)/drho2, d2(rho e)/ds2); both positive since rho e is convex."""
        rho = _check_density(rho)
        sigma = np.asarray(s, dtype=float) / rho
        g = self.gamma
        base = rho ** (g - 2.0) * np.exp(sigma)
        d_rho = base * (g * (g - 1.0) - 2.0 * (g - 1.0) * sigma + sigma ** 2)
        return d_rho, base

    def dq_rho(self, rho_a, rho_b, s):
        """
        Difference quotient of rho e in rho, symmetric in (rho_a, rho_b).

        With g = gamma ln(rho) + s/rho the quotient is
        f(lo) * exprel(dg) * dg/(hi - lo), which has no cancellation as the
        two densities merge.
        """
        rho_a = _check_density(rho_a)
        rho_b = _check_density(rho_b)
        rho_a, rho_b, s = np.broadcast_arrays(rho_a, rho_b, np.asarray(s, dtype=float))
        lo = np.minimum(rho_a, rho_b)
        hi = np.maximum(rho_a, rho_b)
        ratio = (hi - lo) / lo
        # log1p(x)/x, equal to 1 at x = 0
        log_ratio = np.where(ratio > 0.0, np.log1p(ratio) / np.where(ratio > 0.0, ratio, 1.0), 1.0)
        slope = self.gamma * log_ratio / lo - s / (lo * hi)
        return self.rho_e(lo, s) * exprel(slope * (hi - lo)) * slope

    def dq_s(self, rho, s_a, s_b):
        """Difference quotient of rho e in s, T(rho, lo) * exprel((hi - lo)/rho)."""
        rho = _check_density(rho)
        rho, s_a, s_b = np.broadcast_arrays(rho, np.asarray(s_a, dtype=float),
                                            np.asarray(s_b, dtype=float))
        lo = np.minimum(s_a, s_b)
        hi = np.maximum(s_a, s_b)
        return self.temperature(rho, lo) * exprel((hi - lo) / rho)

    def entropy_from_pressure(self, rho, p):
        """Invert p = (gamma-1) rho^gamma exp(s/rho) for s."""
        rho = _check_density(rho)
        p = np.asarray(p, dtype=float)
        if np.any(~(p > 0.0)):
            raise ThermodynamicStateError("pressure must be strictly positive")
        return rho * np.log(p / ((self.gamma - 1.0) * rho ** self.gamma))

    def sound_speed_squared(self, rho, s):
        return self.gamma * self.pressure(rho, s) / _check_density(rho)
