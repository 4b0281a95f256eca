"""
Compute Spectrum use case: post-processing of a finished run directory.
"""
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.domain.entities.case_spec import CaseName
from src.domain.exceptions import ConfigurationError
from src.domain.services.diagnostics import (
    Spectrum,
    dispersion_branches,
    growth_rate,
    ridge_frequencies,
    spacetime_spectrum,
)
from src.infrastructure.persistence.run_store import RunStore
from src.workers.output_workers import ModeEnergyWorker, TraceWorker

logger = logging.getLogger(__name__)

TIME_PADDING = 8
BRANCHES = ("shear", "slow", "fast")


class ComputeSpectrumRequest:
    """Request object for spectrum post-processing."""

    def __init__(self, run_dir, growth_window: Optional[Sequence[float]] = None):
        self.run_dir = Path(run_dir)
        self.growth_window = growth_window


class ComputeSpectrumResponse:
    """Response object for spectrum post-processing."""

    def __init__(self, case: str, files: List[Path], summary: Dict):
        self.case = case
        self.files = files
        self.summary = summary


class ComputeSpectrumUseCase:
    """Dispersion spectra for Dispersion1D runs, growth rates for CurrentSheet2D runs."""

    def execute(self, request: ComputeSpectrumRequest) -> ComputeSpectrumResponse:
        store = RunStore(request.run_dir)
        config = store.read_manifest()["config"]
        case = CaseName(config["case"])
        if case is CaseName.DISPERSION_1D:
            files, summary = self._dispersion(store, config)
        elif case is CaseName.CURRENT_SHEET_2D:
            window = request.growth_window or (config.get("analysis") or {}).get("growth_window")
            files, summary = self._growth(store, window)
        else:
            raise ConfigurationError(f"no spectrum analysis for {case.value}")
        logger.info("spectrum written", extra={"case": case.value, "files": [str(f) for f in files]})
        return ComputeSpectrumResponse(case.value, files, summary)

    def _dispersion(self, store: RunStore, config: dict):
        spectra = dispersion_spectra(store)
        parameters = config["parameters"]
        k = spectra["u"].k[spectra["u"].k >= 0.0]
        branches = dispersion_branches(k, parameters.get("rho0", 1.0), parameters.get("p0", 1.0),
                                       parameters.get("b0", (1.0, 1.0, 0.0)), config["physics"]["gamma"])
        files = [
            store.write_matrix("spectrum_u.csv", spectra["u"].omega, spectra["u"].k, spectra["u"].power),
            store.write_matrix("spectrum_p.csv", spectra["p"].omega, spectra["p"].k, spectra["p"].power),
            store.write_rows("branches.csv", ("k",) + BRANCHES,
                             zip(k, *(branches[name] for name in BRANCHES))),
        ]
        return files, {"peak_u": spectra["u"].peak(), "peak_p": spectra["p"].peak()}

    def _growth(self, store: RunStore, window):
        if window is None:
            raise ConfigurationError("growth rates need a growth_window (analysis.growth_window)")
        modes, times, energies = store.read_trace(ModeEnergyWorker.FILE)
        rows = []
        for j, mode in enumerate(modes):
            rate, r2 = growth_rate(times, energies[:, j], tuple(window))
            rows.append((int(mode), rate, r2))
        path = store.write_rows("growth_rates.csv", ("mode", "rate", "r2"), rows)
        return [path], {"rates": {mode: rate for mode, rate, _ in rows}}


def dispersion_spectra(store: RunStore, time_padding: int = TIME_PADDING) -> Dict[str, Spectrum]:
    out = {}
    for key, name in (("u", TraceWorker.U_FILE), ("p", TraceWorker.P_FILE)):
        x, times, history = store.read_trace(name)
        # drop the mean, Hann taper in time
        history = (history - history.mean(axis=(0, 1))) * np.hanning(len(times))[:, None]
        out[key] = spacetime_spectrum(history, x, times, time_padding)
    return out


def dispersion_errors(spectra: Dict[str, Spectrum], rho0: float, p0: float, b0, gamma: float,
                      n_bins: int = 5) -> Dict[str, np.ndarray]:
    """
    Relative error of the measured ridge against each branch on the lowest
    `n_bins` positive k bins. Shear is read from u_z, slow and fast from p.
    """
    k_axis = spectra["u"].k
    k_values = np.sort(k_axis[k_axis > 0.0])[:n_bins]
    branches = dispersion_branches(k_values, rho0, p0, b0, gamma)
    errors = {}
    for name, key, n_peaks in (("shear", "u", 1), ("slow", "p", 2), ("fast", "p", 2)):
        ridges = ridge_frequencies(spectra[key], k_values, n_peaks=n_peaks)
        expected = branches[name]
        measured = np.array([
            peaks[np.argmin(np.abs(peaks - target))] if len(peaks) else np.nan
            for peaks, target in zip(ridges, expected)
        ])
        errors[name] = np.abs(measured - expected) / expected
    return errors
