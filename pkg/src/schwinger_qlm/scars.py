"""Scar-state classification, sector projections, and the echo revival law.

Scar eigenstates are picked out of the zero-momentum spectrum by their
anomalously large overlap with the vacuum combined with low half-chain
entropy. Two selection modes are provided: a plain threshold on both
quantities, and a window mode that slices the energy axis into bands and
keeps the best overlap per band, which recovers the nearly equally spaced
scar tower.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hamiltonian import EigenstateDiagnostics, SpectralData

__all__ = [
    "ScarCriteria",
    "ScarSet",
    "default_scar_criteria",
    "classify_scars",
    "scar_report",
    "scar_projection",
    "revival_prediction",
]


@dataclass(frozen=True)
class ScarCriteria:
    """Selection thresholds for scar classification.

    overlap_floor and entropy_ceiling gate candidates in both modes;
    window is the energy band width used by the window mode.
    """

    overlap_floor: float
    entropy_ceiling: float
    window: float
    mode: str = "window"  # "window" or "threshold"

    def __post_init__(self) -> None:
        if not 0.0 <= self.overlap_floor < 1.0:
            raise ValueError("overlap_floor must lie in [0, 1)")
        if self.entropy_ceiling <= 0.0:
            raise ValueError("entropy_ceiling must be positive")
        if self.window <= 0.0:
            raise ValueError("window must be positive")
        if self.mode not in ("window", "threshold"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass(frozen=True)
class ScarSet:
    """Sorted eigenstate indices forming the scar sector."""

    indices: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.indices)

    def energies(self, spectral: SpectralData) -> np.ndarray:
        return spectral.energies[list(self.indices)]


def _overlap_peaks(overlap: np.ndarray) -> np.ndarray:
    """Indices whose overlap exceeds both energy neighbours."""
    n = len(overlap)
    left = np.empty(n)
    right = np.empty(n)
    left[0] = -1.0
    left[1:] = overlap[:-1]
    right[-1] = -1.0
    right[:-1] = overlap[1:]
    return np.where((overlap > left) & (overlap > right))[0]


def default_scar_criteria(diag: EigenstateDiagnostics, tower_size: int) -> ScarCriteria:
    """Data-driven defaults.

    Floor 1e-3 on vacuum overlap, entropy ceiling one nat under the sector
    median, and a band width equal to the median energy gap among the
    `tower_size` strongest local overlap peaks. `tower_size` should be the
    expected number of tower members inside the sector (L/4 + 1 for the
    zero-momentum sector; the remaining tower members carry momentum pi).
    The median gap is what makes the estimate robust against the arc of
    high-overlap states just below the tower, which otherwise out-peak the
    low-overlap band-edge members.
    """
    if tower_size < 2:
        raise ValueError("tower_size must be at least 2")
    peaks = _overlap_peaks(diag.vacuum_overlap)
    top = peaks[np.argsort(diag.vacuum_overlap[peaks])[-tower_size:]]
    energies = np.sort(diag.energies[top])
    if len(energies) >= 2:
        window = float(np.median(np.diff(energies)))
    else:
        window = float(diag.energies[-1] - diag.energies[0])
    if window <= 0.0:
        window = float(diag.energies[-1] - diag.energies[0]) or 1.0
    return ScarCriteria(
        overlap_floor=1e-3,
        entropy_ceiling=float(np.median(diag.entropies)) - 1.0,
        window=window,
    )


def _band_indices(energies: np.ndarray, window: float) -> tuple[np.ndarray, int]:
    anchor = energies[0] - window / 2.0
    n_bands = int(np.floor((energies[-1] - anchor) / window)) + 1
    band = np.minimum(((energies - anchor) / window).astype(int), n_bands - 1)
    return band, n_bands


def classify_scars(diag: EigenstateDiagnostics, criteria: ScarCriteria) -> ScarSet:
    """Select scar eigenstates from the diagnostics table.

    Threshold mode keeps every state passing both thresholds. Window mode
    additionally slices the energy axis into bands of the configured width
    (anchored so the ground state sits at a band centre) and keeps only the
    highest-overlap qualifying state per band. An empty result is a valid
    outcome, not an error.
    """
    qualifying = (diag.vacuum_overlap >= criteria.overlap_floor) & \
                 (diag.entropies <= criteria.entropy_ceiling)
    if criteria.mode == "threshold":
        return ScarSet(indices=tuple(int(n) for n in np.where(qualifying)[0]))
    band, n_bands = _band_indices(diag.energies, criteria.window)
    chosen = []
    for b in range(n_bands):
        cand = np.where((band == b) & qualifying)[0]
        if len(cand):
            chosen.append(int(cand[np.argmax(diag.vacuum_overlap[cand])]))
    return ScarSet(indices=tuple(sorted(chosen)))


def scar_report(diag: EigenstateDiagnostics, criteria: ScarCriteria
                ) -> tuple[ScarSet, np.ndarray]:
    """Classification plus the per-band runner-up overlaps.

    Returns the scar set and an array where entry n holds, for a window
    winner n, the overlap of the second-best qualifying state in its band
    (0 when the band has a single qualifying state); entries of non-winner
    states are 0. Threshold mode has no bands, so the array is all zero.
    """
    scars = classify_scars(diag, criteria)
    runner_up = np.zeros(diag.size)
    if criteria.mode == "window":
        qualifying = (diag.vacuum_overlap >= criteria.overlap_floor) & \
                     (diag.entropies <= criteria.entropy_ceiling)
        band, n_bands = _band_indices(diag.energies, criteria.window)
        for b in range(n_bands):
            cand = np.where((band == b) & qualifying)[0]
            if len(cand) >= 2:
                order = cand[np.argsort(diag.vacuum_overlap[cand])]
                runner_up[order[-1]] = diag.vacuum_overlap[order[-2]]
    return scars, runner_up


def scar_projection(state: np.ndarray, scars: ScarSet, spectral: SpectralData) -> float:
    """Weight of a sector state inside the scar sector, sum of |<E_s|psi>|^2."""
    if len(state) != spectral.size:
        raise ValueError(
            f"state has {len(state)} amplitudes, spectral data is {spectral.size}-dimensional")
    if not scars.indices:
        return 0.0
    coeffs = spectral.states[:, list(scars.indices)].T @ state
    return float(np.real(np.vdot(coeffs, coeffs)))


def revival_prediction(omega: float, n_levels: int, t) -> np.ndarray | float:
    """Echo of an equal-weight superposition of levels at energies 0, +-w, ..., +-Nw.

    Closed form |sum_{n=0}^{N} cos(n w t)|^2 / (N+1)^2; equals 1 exactly at
    t = 2 pi k / w and never exceeds 1.
    """
    if omega <= 0:
        raise ValueError("omega must be positive")
    if n_levels < 1:
        raise ValueError("n_levels must be at least 1")
    t_arr = np.asarray(t, dtype=float)
    n = np.arange(n_levels + 1)
    amp = np.cos(np.multiply.outer(t_arr, n) * omega).sum(axis=-1) / (n_levels + 1)
    out = amp * amp
    return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out
